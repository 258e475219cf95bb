"""Reports: a deterministic JSON tree plus a human-readable rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from . import __version__

TOOL = "coiso-quant"


@dataclass
class Report:
    command: str
    scene: str
    side: str
    degree_bound: int
    results: Dict[str, Any]
    summary: List[str] = field(default_factory=list)
    seconds: Optional[float] = None

    def to_json(self) -> Dict[str, Any]:
        # timing is left out so that machine output is byte-stable
        return {
            "tool": TOOL,
            "version": __version__,
            "command": self.command,
            "scene": self.scene,
            "side": self.side,
            "degree_bound": self.degree_bound,
            "summary": list(self.summary),
            "results": self.results,
        }

    def machine(self) -> str:
        return json.dumps(_plain(self.to_json()), sort_keys=True, indent=2) + "\n"

    def human(self) -> str:
        lines = [f"{TOOL} {__version__}  {self.command}  scene={self.scene}  side={self.side}  "
                 f"D={self.degree_bound}"]
        lines += [f"  * {s}" for s in self.summary]
        lines.append("")
        _render(_plain(self.results), lines, 0)
        if self.seconds is not None:
            lines.append(f"\n({self.seconds:.2f}s)")
        return "\n".join(lines) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


def _render(obj, lines: List[str], depth: int) -> None:
    pad = "  " * depth
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                _render(v, lines, depth + 1)
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            lines.append(f"{pad}[{', '.join(_scalar(v) for v in obj)}]")
        else:
            for v in obj:
                lines.append(f"{pad}-")
                _render(v, lines, depth + 1)
    else:
        lines.append(f"{pad}{_scalar(obj)}")


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "-"
    if isinstance(v, (dict, list)):
        return "{}" if isinstance(v, dict) else "[]"
    return str(v)
