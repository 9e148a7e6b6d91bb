"""
Iteration callback module for DT-IRS-Bench.

Records per-iteration optimizer statistics to TensorBoard through the
Stable-Baselines3 logger, and reads them back for analysis.
"""

from pathlib import Path

from stable_baselines3.common.logger import configure
from tensorboard.backend.event_processing import event_accumulator

from dtirs_bench.src.optimizer import IterationTrace


class TraceCallback:
    """
    Writes every IterationTrace of a run as TensorBoard scalars.

    Attributes:
        log_dir: Directory holding the event file.
        prefix: Tag prefix, one per scheme.
    """

    def __init__(self, log_dir: str | Path, prefix: str):
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.prefix = prefix
        self.logger = configure(str(self.log_dir), ["tensorboard"])

    def __call__(self, trace: IterationTrace):
        """Record one outer iteration."""
        p = self.prefix
        self.logger.record(f"{p}/j_value", trace.j_value)
        self.logger.record(f"{p}/sum_delay", trace.sum_delay)
        self.logger.record(f"{p}/loss_term", trace.loss_term)
        self.logger.record(f"{p}/t_dl_sum", trace.t_dl_sum)
        self.logger.record(f"{p}/t_ul_sum", trace.t_ul_sum)
        self.logger.record(f"{p}/t_comp_sum", trace.t_comp_sum)
        self.logger.record(f"{p}/dt_fraction", trace.alpha_fraction_dt)
        self.logger.record(f"{p}/violations", trace.violations)
        for i, ms in enumerate(trace.per_step_ms, start=1):
            self.logger.record(f"{p}/step{i}_ms", ms)
        self.logger.dump(trace.iter)

    def close(self):
        self.logger.close()


def read_scalars(log_dir: str | Path, tag: str) -> list[tuple[int, float]]:
    """
    Extract (step, value) pairs of one tag from the event files in a directory,
    keeping only the most recent recording for each step
    """
    ea = event_accumulator.EventAccumulator(str(log_dir))
    ea.Reload()
    if tag not in ea.Tags()["scalars"]:
        raise FileNotFoundError(f"no scalar {tag} under {log_dir}")
    last_per_step: dict[int, float] = {}
    for s in ea.Scalars(tag):
        last_per_step[int(s.step)] = s.value
    return sorted(last_per_step.items(), key=lambda kv: kv[0])
