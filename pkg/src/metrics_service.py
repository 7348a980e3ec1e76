"""Per-class classification metrics."""

from typing import Iterable, List, Tuple

import numpy as np
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from src.models import EvalReport


class MetricsService:
    """Precision, recall, F1 and accuracy from (true, predicted) label pairs.

    A zero denominator yields 0 for that metric, and F1 is 0 when both
    precision and recall are 0.
    """

    class EmptyInputError(ValueError):
        """Raised when there are no label pairs to evaluate."""

        pass

    @classmethod
    def evaluate(cls, pairs: Iterable[Tuple[str, str]]) -> EvalReport:
        """
        Build an evaluation report.

        The label alphabet is the sorted union of true and predicted labels;
        predicted labels that never occur as a true label are reported in
        ``unknown_labels``.

        Raises:
            EmptyInputError: If pairs is empty
        """
        pairs = [(str(t), str(p)) for t, p in pairs]
        if not pairs:
            raise cls.EmptyInputError("Cannot evaluate an empty list of label pairs")
        y_true = [t for t, _ in pairs]
        y_pred = [p for _, p in pairs]
        labels = sorted(set(y_true) | set(y_pred))
        unknown = sorted(set(y_pred) - set(y_true))

        matrix = confusion_matrix(y_true, y_pred, labels=labels)
        precision, recall, f1, support = precision_recall_fscore_support(
            y_true, y_pred, labels=labels, zero_division=0
        )
        accuracy = float(np.trace(matrix)) / float(matrix.sum())

        return EvalReport(
            labels=tuple(labels),
            precision={label: float(v) for label, v in zip(labels, precision)},
            recall={label: float(v) for label, v in zip(labels, recall)},
            f1={label: float(v) for label, v in zip(labels, f1)},
            support={label: int(v) for label, v in zip(labels, support)},
            accuracy=accuracy,
            confusion=tuple(tuple(int(c) for c in row) for row in matrix),
            unknown_labels=tuple(unknown),
        )

    @staticmethod
    def format_report(report: EvalReport) -> str:
        """Render an aligned Class / Precision / Recall / F1-score table."""
        headers = ("Class", "Precision", "Recall", "F1-score")
        rows: List[Tuple[str, ...]] = [
            (
                label,
                f"{report.precision[label]:.2f}",
                f"{report.recall[label]:.2f}",
                f"{report.f1[label]:.2f}",
            )
            for label in report.labels
        ]
        widths = [
            max(len(headers[i]), *(len(row[i]) for row in rows)) for i in range(len(headers))
        ]

        def render(cells: Tuple[str, ...]) -> str:
            first = cells[0].ljust(widths[0])
            rest = [cell.rjust(width) for cell, width in zip(cells[1:], widths[1:])]
            return "  ".join([first, *rest])

        lines = [render(headers), "  ".join("-" * w for w in widths)]
        lines.extend(render(row) for row in rows)
        lines.append("")
        lines.append(f"Accuracy: {report.accuracy:.2f} ({report.total} samples)")
        return "\n".join(lines)
