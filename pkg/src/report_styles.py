#!/usr/bin/env python3
"""
Styling for the PDF run summaries: a footer canvas with page numbers,
the paragraph styles and the result table style
"""

from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER, TA_LEFT
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.pdfgen import canvas
from reportlab.platypus import TableStyle

__all__ = ['NumberedCanvas', 'create_report_styles', 'result_table_style']

PROJECT_NAME = "hmp-analyticity"

INK = colors.HexColor('#1f2933')
ACCENT = colors.HexColor('#234e70')
MUTED = colors.HexColor('#7b8794')
RULE = colors.HexColor('#d9e2ec')
SHADE = colors.HexColor('#f0f4f8')

# name -> (parent, overrides)
STYLE_TABLE = {
    'SummaryTitle': ('Title', dict(fontSize=26, leading=32, textColor=ACCENT, alignment=TA_CENTER,
                                   spaceAfter=18, fontName='Helvetica-Bold')),
    'SummarySubtitle': ('Normal', dict(fontSize=13, leading=17, textColor=MUTED, alignment=TA_CENTER,
                                       spaceAfter=10)),
    'SummaryBody': ('Normal', dict(fontSize=10, leading=14, textColor=INK, alignment=TA_LEFT, spaceAfter=8)),
    'CheckHeading': ('Heading2', dict(fontSize=13, leading=17, textColor=ACCENT, spaceBefore=12, spaceAfter=6,
                                      fontName='Helvetica-Bold')),
    'VerdictNote': ('Normal', dict(fontSize=9, leading=12, textColor=INK, backColor=SHADE, borderColor=RULE,
                                   borderWidth=0.5, borderPadding=6, spaceBefore=4, spaceAfter=10)),
}


class NumberedCanvas(canvas.Canvas):
    """Deferred page rendering so every footer can show the total page count"""

    def __init__(self, *args, **kwargs):
        self.run_label = kwargs.pop('run_label', 'run')
        self.report_type = kwargs.pop('report_type', 'Run Summary')
        canvas.Canvas.__init__(self, *args, **kwargs)
        self._saved_page_states = []

    def showPage(self):
        self._saved_page_states.append(dict(self.__dict__))
        self._startPage()

    def save(self):
        total = len(self._saved_page_states)
        for state in self._saved_page_states:
            self.__dict__.update(state)
            self._draw_footer(total)
            canvas.Canvas.showPage(self)
        canvas.Canvas.save(self)

    def _draw_footer(self, total: int):
        # title page carries no footer
        if self._pageNumber == 1:
            return
        margin = 0.6 * 72
        self.setStrokeColor(RULE)
        self.setLineWidth(0.5)
        self.line(margin, 0.75 * 72, A4[0] - margin, 0.75 * 72)
        self.setFillColor(MUTED)
        self.setFont("Helvetica", 8)
        self.drawString(margin, 0.55 * 72, f"{PROJECT_NAME} | {self.report_type} | {self.run_label}")
        self.drawRightString(A4[0] - margin, 0.55 * 72, f"{self._pageNumber} / {total}")


def create_report_styles():
    """Sample stylesheet extended with the summary styles"""
    styles = getSampleStyleSheet()
    for name, (parent, overrides) in STYLE_TABLE.items():
        if name not in styles:
            styles.add(ParagraphStyle(name=name, parent=styles[parent], **overrides))
    return styles


def result_table_style(header: bool = True) -> TableStyle:
    """Banded rows in a fixed-width font so digits line up"""
    first_body_row = 1 if header else 0
    commands = [
        ('FONT', (0, 0), (-1, -1), 'Courier', 8),
        ('TEXTCOLOR', (0, 0), (-1, -1), INK),
        ('ROWBACKGROUNDS', (0, first_body_row), (-1, -1), [colors.white, SHADE]),
        ('VALIGN', (0, 0), (-1, -1), 'TOP'),
        ('TOPPADDING', (0, 0), (-1, -1), 3),
        ('BOTTOMPADDING', (0, 0), (-1, -1), 3),
        ('LINEBELOW', (0, 0), (-1, -1), 0.25, RULE),
    ]
    if header:
        commands += [
            ('FONT', (0, 0), (-1, 0), 'Helvetica-Bold', 9),
            ('TEXTCOLOR', (0, 0), (-1, 0), ACCENT),
            ('LINEBELOW', (0, 0), (-1, 0), 1, ACCENT),
        ]
    return TableStyle(commands)
