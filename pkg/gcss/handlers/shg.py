"""Handler for the ``shg`` command: two-mode evolution and the 2w Wigner map."""

from typing import Any, Dict

from loguru import logger

from gcss.handlers.router import Command, CommandRouter
from gcss.physics.fock import expectation_value, ladder_operators
from gcss.physics.shg import build_hamiltonian, evolve, initial_state, second_harmonic_state, tune_coupling
from gcss.physics.wigner import PhaseGrid, wigner_extrema, wigner_fock
from gcss.utils.io import write_density_csv, write_trajectory_json, write_wigner_csv
from gcss.utils.messages import messages


class ShgHandlers:
    """Evolves each configured input through the SHG interaction."""

    def __init__(self):
        self.router = CommandRouter(name="shg_handlers")
        self._register_handlers()

    def _register_handlers(self):
        self.router.command("shg")(self.shg_command)

    def shg_command(self, command: Command, data: Dict[str, Any]) -> Dict[str, Any]:
        """
        Handle ``shg``: tune chi*t on the coherent input, then evolve every input.

        Args:
            command: Parsed command
            data: Shared runtime data

        Returns:
            Per-input <n_2w> and Wigner negativity
        """
        config = command.config
        section = config.shg
        system = config.shg_system()
        params = config.shg_params()
        grid = PhaseGrid.around(0.0, section.wigner_half_width, section.wigner_points)
        inputs = {kind: initial_state(kind, params, system) for kind in section.inputs}
        if command.dry_run:
            return {"config": config.resolved()}

        h = build_hamiltonian(system)
        if section.target_n2w is not None:
            reference = inputs["coherent"] if "coherent" in inputs else initial_state("coherent", params, system)
            system = tune_coupling(section.target_n2w, reference, system, h=h)

        _, _, number = ladder_operators(system.n_max_2w)
        results = {}
        for kind, psi0 in inputs.items():
            logger.info(f"🔁 Evolving {kind} input, chi*t={system.interaction:.4g}")
            traj = evolve(h, psi0, system, snapshots=section.snapshots, tol=section.tol, method=section.method)
            rho = second_harmonic_state(traj)
            field = wigner_fock(rho, grid, config.wigner.method)
            extrema = wigner_extrema(field)
            n_2w = float(expectation_value(number, rho).real)

            out = command.out_dir / kind
            write_trajectory_json(traj, system, out / "trajectory.json", {"input": kind, "wigner_2w": extrema.as_dict()})
            write_density_csv(rho, out / "rho_2w.csv")
            write_wigner_csv(field, out / "wigner_2w.csv")
            logger.info(messages.get_shg_report(kind, {"interaction": system.interaction}, n_2w, extrema.min_value))
            results[kind] = {
                "n_2w": n_2w,
                "w_min": extrema.min_value,
                "negative_volume": extrema.negative_volume,
            }

        return {"interaction": system.interaction, "t_final": system.t_final, "inputs": results}


def setup_shg_handlers() -> CommandRouter:
    """Setup and return the SHG router."""
    return ShgHandlers().router
