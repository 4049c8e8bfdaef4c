from pathlib import Path
from typing import Dict, List

from errors import ScenarioFormatError
from walker_sim import Scenario, Segment

HEADER = "scenario v1"
SCENARIO_DIR = Path(__file__).parent / "scenarios"


def parse_scenario(text: str, name: str) -> Scenario:
    """Parse the declarative segment list.

    After the header line every non-comment line is `straight <m>` or `turn <deg>`
    followed by optional `speed=<m/s>` and (turns) `radius=<m>`.
    """
    lines = [(n, line.split("#", 1)[0].strip()) for n, line in enumerate(text.splitlines(), 1)]
    lines = [(n, line) for n, line in lines if line]
    if not lines or lines[0][1] != HEADER:
        raise ScenarioFormatError(f"{name}: first line must be '{HEADER}'")

    segments: List[Segment] = []
    for n, line in lines[1:]:
        kind, *rest = line.split()
        if kind not in ("straight", "turn") or not rest:
            raise ScenarioFormatError(f"{name}:{n}: expected 'straight <m>' or 'turn <deg>', got {line!r}")
        options: Dict[str, float] = {}
        try:
            amount = float(rest[0])
            for item in rest[1:]:
                key, value = item.split("=", 1)
                if key not in ("speed", "radius"):
                    raise ScenarioFormatError(f"{name}:{n}: unknown option {key!r}")
                options[key] = float(value)
        except ValueError as e:
            raise ScenarioFormatError(f"{name}:{n}: {e}") from e
        segments.append(Segment(kind, amount, options.get("speed", 0.5), options.get("radius", 1.0)))
    return Scenario(name, tuple(segments))


def load_scenario(path: Path) -> Scenario:
    path = Path(path)
    if not path.exists() and (SCENARIO_DIR / path).exists():
        path = SCENARIO_DIR / path
    try:
        text = path.read_text()
    except OSError as e:
        raise ScenarioFormatError(f"cannot read scenario {path}: {e}") from e
    return parse_scenario(text, path.stem)
