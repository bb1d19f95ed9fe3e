from .client import DEFAULT_DEADLINE, Client, FrameAssembly
from .encoder import SyntheticEncoder
from .monitor import (
    NpmState, Ring, RttProber, StageDelays, compute_mtp, count_missing,
    measure_loss, measure_throughput, smooth,
)
from .server import BLOCK_MODES, Server
from .transport import EmulatedPath, UdpTransport
