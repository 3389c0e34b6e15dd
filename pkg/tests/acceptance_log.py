"""Collects one line per acceptance criterion for the terminal summary."""
LINES: list[str] = []


def record(number, name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number} {name}: {detail}"
    LINES.append(line)
    print(line)
    return ok
