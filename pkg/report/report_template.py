import math

from common.errors import ParameterError


class ReportTemplate:
    """
    A class to render evaluation reports as aligned plain-text tables and
    LaTeX tables, with support for different languages.
    """

    def __init__(
        self,
        language="english",
        significant_digits=3,
        metric_names=None,
        method_names=None,
    ):
        if language not in self._get_translations():
            raise ParameterError(
                f"Unsupported language '{language}'. Choose english or german."
            )
        self.language = language
        self.significant_digits = significant_digits
        self.metric_names = metric_names or {}
        self.method_names = method_names or {}
        self.translations = self._get_translations()
        self._use_comma = True if language == "german" else False

    @staticmethod
    def _get_translations():
        """
        Returns a dictionary of translations for supported languages.
        """
        return {
            "english": {
                "dataset": "Dataset",
                "metric": "Metric",
                "caption": "Comparative errors on the test samples (mean±std over trials, in mm).",  # noqa
                "wilcoxon": "Wilcoxon signed-rank test",
                "versus": "vs",
                "one_sided": "one-sided",
                "two_sided": "two-sided",
                "failed": "failed trials",
                "no_data": "n/a",
            },
            "german": {
                "dataset": "Datensatz",
                "metric": "Metrik",
                "caption": "Vergleich der Fehler auf den Testdaten (Mittelwert±Standardabweichung über die Versuche, in mm).",  # noqa
                "wilcoxon": "Wilcoxon-Vorzeichen-Rang-Test",
                "versus": "gegen",
                "one_sided": "einseitig",
                "two_sided": "zweiseitig",
                "failed": "fehlgeschlagene Versuche",
                "no_data": "k. A.",
            },
        }

    def _translate(self, keyword):
        """
        Translates a keyword to the specified language.
        """
        return self.translations[self.language].get(keyword, keyword)

    def _method_name(self, method):
        return self.method_names.get(method, method)

    def _metric_name(self, metric):
        return self.metric_names.get(metric, metric)

    def _decimal(self, text):
        return text.replace(".", ",") if self._use_comma else text

    def _format_cell(self, agg, decimals=2):
        return self._decimal(agg.format(decimals))

    def _round_to_significant_digits(self, num):
        """Plain-text rounding, scientific notation for tiny or huge values."""
        if num == 0:
            return "0"
        if abs(num) < 1e-3 or abs(num) > 1e6:
            return self._decimal(f"{num:.{self.significant_digits - 1}e}")

        decimals = max(self.significant_digits - int(math.floor(math.log10(abs(num)))) - 1, 0)
        return self._decimal(f"{num:.{decimals}f}")

    def _round_to_significant_digits_latex(self, num):
        if num == 0:
            return "$0$"

        # Apply scientific notation for very small or very large numbers
        if abs(num) < 1e-3 or abs(num) > 1e6:
            exponent = int(f"{num:e}".split("e")[-1])
            # Round the base to the specified number of significant digits
            base = round(num / (10**exponent), self.significant_digits - 1)
            formatted_base = f"{{:.{self.significant_digits - 1}f}}".format(
                base
            )

            return f"${self._decimal(formatted_base)} \\times 10^{{{exponent}}}$"

        return f"${self._round_to_significant_digits(num)}$"

    def _best_methods(self, by_method, metric):
        """Methods holding the lowest mean for ``metric`` (ties all win)."""
        means = {
            method: agg[metric].mean for method, agg in by_method.items() if agg is not None
        }
        if not means:
            return set()
        best = min(means.values())
        return {method for method, mean in means.items() if mean == best}

    def _table_rows(self, report, metrics, best_marker):
        rows = []
        for dataset in report.datasets:
            by_method = report.aggregated[dataset]
            for metric in metrics:
                best = self._best_methods(by_method, metric)
                row = [dataset, self._metric_name(metric)]
                for method in report.methods:
                    agg = by_method.get(method)
                    if agg is None:
                        row.append(self._translate("no_data"))
                        continue
                    cell = self._format_cell(agg[metric])
                    row.append(best_marker(cell) if method in best else cell)
                rows.append(row)
        return rows

    def _wilcoxon_line(self, report, fmt):
        proposed, baseline = report.compare
        title = (
            f"{self._translate('wilcoxon')} ({self._method_name(proposed)} "
            f"{self._translate('versus')} {self._method_name(baseline)})"
        )
        if report.wilcoxon is None:
            return f"{title}: {report.wilcoxon_error}"

        w = report.wilcoxon
        return (
            f"{title}: R+ = {fmt(w.r_plus)}, R- = {fmt(w.r_minus)}, n = {w.n_effective}, "
            f"p ({self._translate('one_sided')}) = {fmt(w.p_one_sided)}, "
            f"p ({self._translate('two_sided')}) = {fmt(w.p_two_sided)}"
        )

    def text_table(self, report, metrics=("max_err", "rmse", "mean_err")):
        """
        Aligned plain-text table: one row per dataset and metric, one column
        per method, '*' marking the best mean of each row.
        """
        header = [self._translate("dataset"), self._translate("metric")] + [
            self._method_name(m) for m in report.methods
        ]
        rows = [header] + self._table_rows(report, metrics, lambda cell: f"{cell}*")
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]

        lines = []
        for index, row in enumerate(rows):
            lines.append(
                "  ".join(
                    cell.ljust(w) if i < 2 else cell.rjust(w)
                    for i, (cell, w) in enumerate(zip(row, widths))
                ).rstrip()
            )
            if index == 0:
                lines.append("  ".join("-" * w for w in widths))

        lines.append("")
        lines.append(self._wilcoxon_line(report, self._round_to_significant_digits))
        failed = len(report.failures())
        if failed:
            lines.append(f"{self._translate('failed')}: {failed}")

        return "\n".join(lines) + "\n"

    def latex_table(self, report, metrics=("max_err", "rmse", "mean_err"), label="comparison"):
        """
        Generates a booktabs table environment with the best mean of every
        row in bold.
        """
        header = [self._translate("dataset"), self._translate("metric")] + [
            self._method_name(m) for m in report.methods
        ]
        header = " & ".join(f"\\textbf{{{h}}}" for h in header)
        rows = self._table_rows(report, metrics, lambda cell: f"\\textbf{{{cell}}}")
        body = "\n".join(
            "\t\t" + " & ".join(cell.replace("±", "$\\pm$").replace("_", "\\_") for cell in row) + " \\\\"
            for row in rows
        )
        columns = "ll" + "r" * len(report.methods)
        wilcoxon = self._wilcoxon_line(report, self._round_to_significant_digits_latex)

        return (
            f"\\begin{{table}}[h!]\n"
            f"\t\\centering\n"
            f"\t\\begin{{tabular}}{{@{{}}{columns}@{{}}}}\n"
            f"\t\t\\toprule\n"
            f"\t\t{header} \\\\\n"
            f"\t\t\\midrule\n"
            f"{body}\n"
            f"\t\t\\bottomrule\n"
            f"\t\\end{{tabular}}\n"
            f"\t\\caption{{{self._translate('caption')} {wilcoxon}.}}\n"
            f"\t\\label{{tab:{label}}}\n"
            f"\\end{{table}}\n"
        )
