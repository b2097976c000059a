from pathlib import Path


class DatasetSearch:
    """
    This class is used to search directories for dataset CSV files and to
    load them in a stable order.
    """

    def __init__(self, start_path: Path):
        self.start_path = Path(start_path)
        self.dataset_paths = self._get_dataset_paths(self.start_path)

    def _get_dataset_paths(self, start_path):
        """
        Recursively searches for '.csv' files in all subdirectories of
        start_path. A file argument is returned as it is.

        :param start_path: The file or directory path to start the search from
        :return: A sorted list of pathlib.Path objects pointing to the files
        """
        if start_path.is_file():
            return [start_path]
        if not start_path.exists():
            raise FileNotFoundError(f"No such file or directory: '{start_path}'")

        dataset_paths = set()
        for path in start_path.rglob("*.csv"):
            # curve and report outputs sit next to the data sometimes
            if path.is_file() and not path.name.startswith(("convergence_", "positions_")):
                dataset_paths.add(path)

        dataset_paths = list(dataset_paths)
        dataset_paths.sort()

        return dataset_paths


def find_datasets(*paths) -> list:
    """Expand files and directories into a sorted, de-duplicated path list."""
    found = []
    for path in paths:
        for dataset_path in DatasetSearch(path).dataset_paths:
            if dataset_path not in found:
                found.append(dataset_path)

    return found
