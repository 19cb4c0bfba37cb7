B, RD, GR, YL, BL, CY = [lambda msg, i=i: f"\x1b[{i}m{msg}\x1b[m" for i in [1, 31, 32, 33, 34, 36]]

def percent(value: float | None) -> str:
    """Score cell of a result table: green at 100, red at 0, dim when nothing was scored"""
    if value is None:
        return '\x1b[2m-\x1b[m'
    text = f"{value:.2f}"
    if value >= 100:
        return GR(text)
    if value <= 0:
        return RD(text)
    return YL(text)

def status(ok: bool, text: str) -> str:
    return GR(text) if ok else RD(text)
