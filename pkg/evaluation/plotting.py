import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import seaborn as sns  # noqa: E402

sns.set_context("paper", font_scale=1.5)
sns.set_style("whitegrid")

# reproducible SVG output: fixed element ids, no creation date
plt.rcParams["svg.hashsalt"] = "shaperlab"


class ResultPlotter:
    """Line charts of sensitivity curves, convergence histories and traces."""

    def _save(self, save_path):
        plt.tight_layout()
        if save_path is not None:
            plt.savefig(save_path, format="svg", metadata={"Date": None})
            plt.close()
        else:
            plt.show()

    def plot_sensitivity(self, curves: dict, threshold=0.05, save_path=None):
        """
        :param curves: {label: (npoints, 2) array of (ratio, V) rows}
        """
        plt.figure(figsize=(5, 3))
        for label, curve in curves.items():
            plt.plot(curve[:, 0], curve[:, 1], label=label)
        plt.axhline(threshold, color="grey", linestyle="--", linewidth=1)
        plt.xlabel("Frequency ratio ω/ω_n")
        plt.ylabel("Residual vibration V")
        plt.legend()
        self._save(save_path)

    def plot_convergence(self, errors, label="Training error", save_path=None):
        """Per-epoch error as points with the best value so far as a line."""
        errors = np.asarray(errors, dtype=float)
        epochs = np.arange(1, errors.size + 1)
        best_so_far = np.minimum.accumulate(errors) if errors.size else errors

        plt.figure(figsize=(5, 3))
        plt.scatter(epochs, errors, label=label, alpha=0.6)
        plt.plot(epochs, best_so_far, label="Best Value", color="red")
        plt.xlabel("Epoch")
        plt.ylabel(label)
        plt.legend()
        self._save(save_path)

    def plot_convergence_table(self, frame, save_path=None):
        """One curve per method column of a convergence DataFrame."""
        plt.figure(figsize=(5, 3))
        for column in frame.columns:
            if column == "epoch":
                continue
            plt.plot(frame["epoch"], frame[column], marker="o", markersize=3, label=column)
        plt.xlabel("Epoch")
        plt.ylabel("Training error (mm)")
        plt.legend()
        self._save(save_path)

    def plot_positions(self, frame, save_path=None):
        """Time traces of a positions DataFrame (time_s plus one column per trace)."""
        plt.figure(figsize=(5, 3))
        for column in frame.columns:
            if column == "time_s":
                continue
            style = "--" if column == "ideal" else "-"
            plt.plot(frame["time_s"], frame[column], style, label=column)
        plt.xlabel("Time (s)")
        plt.ylabel("Displacement (mm)")
        plt.legend()
        self._save(save_path)

    def plot_response(self, times, samples, command=None, save_path=None):
        plt.figure(figsize=(5, 3))
        if command is not None:
            plt.plot(times, command, "--", label="Command", color="grey")
        plt.plot(times, samples, label="Displacement")
        plt.xlabel("Time (s)")
        plt.ylabel("Displacement (mm)")
        plt.legend()
        self._save(save_path)
