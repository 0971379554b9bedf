#!/usr/bin/env python3
"""
PDF summaries for certify, radius and sweep runs
Renders the same JSON-ready data the CLI prints as tables; no plots
"""

import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from reportlab.lib.pagesizes import A4
from reportlab.platypus import SimpleDocTemplate, Paragraph, Spacer, PageBreak, Table, TableStyle
from reportlab.lib.units import inch
from reportlab.lib import colors

from src.errors import ArgumentError
from src.report_styles import ACCENT, RULE, SHADE, NumberedCanvas, create_report_styles, result_table_style

logger = logging.getLogger(__name__)

REPORT_TITLES = {
    "certify": ("Contraction Certification", "Sampled checks of matrix actions and feasible tuples"),
    "radius": ("Analyticity Radius", "Certified lower bound from the relaxed feasibility conditions"),
    "sweep": ("Analyticity Radius Sweep", "Certified lower bounds along the symmetric chain family"),
}


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return "%.15g" % value
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, float) for v in value):
        return "%.6g%+.6gi" % (value[0], value[1])
    return str(value)


def _flatten(data: Dict[str, Any], prefix: str = "") -> List[Tuple[str, str]]:
    """Flatten nested dicts into (dotted key, cell) rows; long arrays are summarized"""
    rows = []
    for key in sorted(data):
        value = data[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            rows.extend(_flatten(value, name + "."))
        elif isinstance(value, list) and len(value) > 4:
            rows.append((name, f"[{len(value)} entries]"))
        else:
            rows.append((name, _cell(value)))
    return rows


class CertificationReportGenerator:
    """Render run results into a tabular PDF summary"""

    def __init__(self, run_label: Optional[str] = None):
        self.timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.run_label = run_label or f"run {self.timestamp}"

    def create_title_page(self, styles, kind: str, parameters: Dict[str, Any]):
        """Title, subtitle and the run parameter table"""
        title, subtitle = REPORT_TITLES[kind]
        elements = [Spacer(1, 1.5 * inch), Paragraph(title, styles['SummaryTitle']), Spacer(1, 0.3 * inch),
                    Paragraph(subtitle, styles['SummarySubtitle']), Spacer(1, 0.5 * inch)]

        details_data = [[f"{k}:", v] for k, v in _flatten(parameters)]
        if details_data:
            details_table = Table(details_data, colWidths=[2.2 * inch, 3.6 * inch])
            details_table.setStyle(TableStyle([
                ('FONT', (0, 0), (0, -1), 'Helvetica-Bold', 9),
                ('FONT', (1, 0), (1, -1), 'Courier', 9),
                ('TEXTCOLOR', (0, 0), (-1, -1), ACCENT),
                ('ALIGN', (0, 0), (0, -1), 'RIGHT'),
                ('ROWBACKGROUNDS', (0, 0), (-1, -1), [colors.white, SHADE]),
                ('TOPPADDING', (0, 0), (-1, -1), 5),
                ('BOTTOMPADDING', (0, 0), (-1, -1), 5),
                ('LINEBELOW', (0, 0), (-1, -1), 0.5, RULE),
            ]))
            elements.append(details_table)

        elements.append(Spacer(1, 0.5 * inch))
        elements.append(Paragraph(f"Report Generated: {datetime.now().strftime('%B %d, %Y')}",
                                  styles['SummaryBody']))
        elements.append(PageBreak())
        return elements

    def create_table_section(self, title: str, header: Optional[Sequence[str]], rows: Sequence[Sequence[str]],
                             styles, note: Optional[str] = None):
        """Section heading, optional highlight note and a result table"""
        elements = [Paragraph(title, styles['CheckHeading']), Spacer(1, 0.15 * inch)]
        if note:
            elements.append(Paragraph(note, styles['VerdictNote']))
        data = ([list(header)] if header else []) + [list(r) for r in rows]
        if data:
            table = Table(data, repeatRows=1 if header else 0)
            table.setStyle(result_table_style(header=bool(header)))
            elements.append(table)
        elements.append(Spacer(1, 0.25 * inch))
        return elements

    def _sections(self, kind: str, payload: Dict[str, Any], styles):
        elements = []
        if kind == "certify":
            for name in sorted(payload.get("checks", {})):
                check = payload["checks"][name]
                verdict = check.get("passed")
                if check.get("error"):
                    note = f"<b>error:</b> {check['error']}"
                else:
                    note = f"<b>passed:</b> {_cell(verdict)}"
                elements.extend(self.create_table_section(
                    name, ["quantity", "value"], _flatten(check.get("result") or {}), styles, note))
        elif kind == "radius":
            note = payload.get("diagnostic")
            elements.extend(self.create_table_section(
                "Search result", ["quantity", "value"], _flatten(payload.get("search", {})), styles,
                f"<b>diagnostic:</b> {note}" if note else None))
            if payload.get("conditions"):
                elements.extend(self.create_table_section(
                    "Sampled conditions", ["quantity", "value"], _flatten(payload["conditions"]), styles))
        elif kind == "sweep":
            header = ["p", "r_max", "R", "rho", "samples_tried", "diagnostic"]
            rows = [[_cell(row.get(h)) if h != "diagnostic" else (row.get(h) or "")[:60] for h in header]
                    for row in payload.get("rows", [])]
            elements.extend(self.create_table_section("Sweep rows", header, rows, styles))
        return elements

    def create_pdf(self, kind: str, payload: Dict[str, Any], output_path: str):
        """Build the PDF for one run"""
        if kind not in REPORT_TITLES:
            raise ArgumentError(f"unknown report kind '{kind}'")
        logger.info(f"📄 Creating {kind} PDF: {output_path}")

        doc = SimpleDocTemplate(
            output_path,
            pagesize=A4,
            rightMargin=0.7 * inch,
            leftMargin=0.7 * inch,
            topMargin=0.7 * inch,
            bottomMargin=1 * inch,
            title=REPORT_TITLES[kind][0],
            author="hmp-analyticity"
        )

        styles = create_report_styles()
        elements = []
        elements.extend(self.create_title_page(styles, kind, payload.get("parameters", {})))
        elements.extend(self._sections(kind, payload, styles))

        def make_canvas(*args, **kwargs):
            return NumberedCanvas(
                *args,
                run_label=self.run_label,
                report_type=REPORT_TITLES[kind][0],
                **kwargs
            )
        doc.build(elements, canvasmaker=make_canvas)
        logger.info(f"✅ {kind} PDF created: {output_path}")

    def generate_report(self, kind: str, payload: Dict[str, Any], output_path: str) -> Dict[str, Any]:
        """
        Render a PDF summary

        Args:
            kind: certify, radius or sweep
            payload: JSON-ready dict with "parameters" plus kind-specific results
            output_path: Destination PDF path

        Returns:
            Dict with the pdf path and timestamp
        """
        path = Path(output_path).expanduser()
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        self.create_pdf(kind, payload, str(path))
        return {"pdf_path": str(path), "kind": kind, "timestamp": self.timestamp}
