"""Path-adaptive joint source-channel coding for multipath real-time video."""
from .allocator import (AllocationDecision, ChannelEstimate, PathEstimate, SearchGrid, allocate,
                        check_constraints, evaluate)
from .channel import (ChainState, Fate, GilbertParams, LossMode, PathSpec, PathState,
                      gilbert_from_stats, next_fate, stationary, transit)
from .config import config_to_dict, dump_scenario, load_scenario
from .distortion import PRESETS, DistortionParams, d_src, d_total, mse_to_psnr, psnr_to_mse
from .estimator import (EffectiveLoss, PacketAssignment, block_failure_prob_iid,
                        effective_loss_mc, residual_loss_iid)
from .fec import DecodeFailure, EncodedBlock, FecBlockSpec, decode, encode
from .gop import GopSpec, packetize
from .sim import (Outcome, Policy, ScenarioConfig, SimReport, client_receive, distribute,
                  feedback_update, run_scenario)

__version__ = "0.1.0"
