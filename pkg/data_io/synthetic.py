import logging
import math

from common.errors import ParameterError
from dynamics import SecondOrderParams, simulate_response

from .dataset import Dataset, Excitation
from .rng import substream

logger = logging.getLogger(__name__)

MAX_SAMPLE_RATE = 1000.0


def generate_synthetic(
    p: SecondOrderParams,
    excitation: Excitation,
    duration: float,
    sample_rate: float,
    noise_sigma: float = 0.0,
    seed: int = 0,
    initial_position: float = None,
    meta: dict = None,
) -> Dataset:
    """
    Simulated displacement trace of ``p`` driven by ``excitation`` with
    i.i.d. Gaussian sensor noise of ``noise_sigma`` mm.

    :param initial_position: start displacement; None means at rest, except
        for free vibration, which starts released from the amplitude
    """
    if not (math.isfinite(duration) and duration > 0):
        raise ParameterError(f"duration must be > 0 s, got {duration}.")
    if not (0 < sample_rate <= MAX_SAMPLE_RATE):
        raise ParameterError(
            f"sample_rate must lie in (0, {MAX_SAMPLE_RATE:g}] Hz, got {sample_rate}."
        )
    if not (math.isfinite(noise_sigma) and noise_sigma >= 0):
        raise ParameterError(f"noise_sigma must be >= 0 mm, got {noise_sigma}.")

    n = int(round(duration * sample_rate))
    if n < 2:
        raise ParameterError("duration * sample_rate must give at least 2 samples.")
    dt = 1.0 / sample_rate

    if initial_position is None:
        initial_position = excitation.amplitude if excitation.kind == "free" else 0.0

    command = excitation.to_command(n, 0.0, dt)
    clean = simulate_response(p, command, initial_position, 0.0)

    samples = clean.samples
    if noise_sigma > 0:
        rng = substream(seed)
        samples = samples + rng.normal(0.0, noise_sigma, size=n)

    info = dict(meta or {})
    info.update(excitation.to_meta())
    info["noise_mm"] = float(noise_sigma)
    info["seed"] = int(seed)
    if initial_position:
        info["initial_mm"] = float(initial_position)
    logger.debug("Generated %d samples for %s", n, p)

    return Dataset(clean.with_samples(samples), info, p)
