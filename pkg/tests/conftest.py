import numpy as np
import pytest

from pajscc.allocator import ChannelEstimate, PathEstimate, SearchGrid
from pajscc.channel import PathSpec, gilbert_from_stats
from pajscc.distortion import DistortionParams
from pajscc.gop import GopSpec


@pytest.fixture
def gop():
    return GopSpec(frames_per_gop=8, frame_rate_fps=30.0, playout_offset_s=0.4)


@pytest.fixture
def dist():
    return DistortionParams(d0=2.0, alpha=6000.0, v0=40.0, beta=3000.0)


def make_path(pid="p", bw=2000.0, delay=20.0, loss=0.0, burst=1.0, mode="gilbert", avail=()):
    return PathSpec(id=pid, bandwidth_kbps=bw, prop_delay_ms=delay,
                    loss=gilbert_from_stats(loss, burst), mode=mode, availability=avail)


def estimates(**paths):
    """``estimates(a=(bw, delay_ms, loss), ...)``"""
    return ChannelEstimate({pid: PathEstimate(*v) for pid, v in paths.items()})


def random_estimates(rng, count, bw=(200.0, 2500.0), loss=(0.0, 0.3)):
    return ChannelEstimate({
        f"p{i}": PathEstimate(bandwidth_kbps=float(rng.uniform(*bw)),
                              delay_ms=float(rng.uniform(5, 150)),
                              loss=float(rng.uniform(*loss)))
        for i in range(count)
    })


def small_grid(top=2000.0, step=200.0, **kw):
    return SearchGrid(v_candidates=tuple(np.arange(200.0, top + 1e-9, step)), **kw)
