"""Summary and diagnostic text for the command line."""

import json
from typing import Any, Dict, Mapping, Optional


class MessageTemplates:
    """Builds the stdout summary line and the human-readable stderr reports."""

    @staticmethod
    def get_summary_line(command: str, exit_code: int, out_dir: Optional[str], payload: Mapping[str, Any]) -> str:
        """One-line JSON summary printed on stdout."""
        record = {
            "command": command,
            "status": "ok" if exit_code == 0 else "error",
            "exit_code": exit_code,
            "out": out_dir,
        }
        record.update(payload)
        return json.dumps(record, sort_keys=True, default=float)

    def get_trace_report(self, metrics: Mapping[str, Mapping[str, float]]) -> str:
        """Table of S(0) and M per state kind."""
        lines = [
            "📈 Autocorrelation metrics",
            "━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━",
            f"{'state':<16}{'S(0)':>10}{'M':>10}",
        ]
        for kind, values in metrics.items():
            lines.append(f"{kind:<16}{values['s_zero']:>10.4f}{values['m_depth']:>10.4f}")
        return "\n".join(lines)

    def get_sweep_report(self, alpha: float, threshold: Optional[float]) -> str:
        if threshold is None:
            return f"🧭 |alpha|={alpha:g}: no deviation from the coherent trace on the grid"
        return f"🧭 |alpha|={alpha:g}: deviation from the coherent trace for |delta_alpha| < {threshold:.3g}"

    def get_shg_report(self, kind: str, system: Mapping[str, Any], n_2w: float, w_min: float) -> str:
        return (
            f"🌈 SHG [{kind}] chi*t={system['interaction']:.4g} | "
            f"<n_2w>={n_2w:.3f} | min W_2w={w_min:.3e}"
        )

    def get_qspec_report(self, report: Mapping[str, Any]) -> str:
        lines = [
            "🎯 Spectrometer conditioning",
            f"• stable shots: {report['stable_fraction']:.2%}",
            f"• retained on the diagonal: {report['retained_fraction']:.3%} ({report['n_selected']} shots)",
            f"• loss peaks: {', '.join(f'{p:.1f}' for p in report['peaks']) or 'none'}",
        ]
        if "enrichment" in report:
            lines.append(f"• event enrichment: {report['enrichment']:.1f}x")
        return "\n".join(lines)

    @staticmethod
    def get_dry_run_message(command: str, resolved: Dict[str, Any]) -> str:
        """Resolved parameter set for --dry-run."""
        return json.dumps({"command": command, "dry_run": True, "config": resolved}, sort_keys=True, default=str)

    def get_error_message(self, error_type: str = "generic", detail: str = "") -> str:
        """Diagnostic shown on stderr when a command fails."""
        error_messages = {
            "generic": "❌ Unexpected failure",
            "config": "⚙️ Configuration error",
            "numerical": "🧮 Numerical failure",
            "interrupted": "⏹️ Interrupted",
        }
        head = error_messages.get(error_type, error_messages["generic"])
        return f"{head}: {detail}" if detail else head


# Global message templates instance
messages = MessageTemplates()

__all__ = ['MessageTemplates', 'messages']
