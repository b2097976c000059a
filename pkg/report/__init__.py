from .report_template import ReportTemplate  # noqa
