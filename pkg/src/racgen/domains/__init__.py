"""Schema builders for the Blocks World, Logistics and DWR domains."""
from .blocks import BLOCKS_MOVE, BLOCKS_STRIPS, build_blocks_move, build_blocks_strips
from .dwr import DWR, build_dwr
from .logistics import LOGISTICS, build_logistics

BUILDERS = {
    "blocks": build_blocks_move,
    "blocks_strips": build_blocks_strips,
    "logistics": build_logistics,
    "dwr": build_dwr,
}

__all__ = [
    "BLOCKS_MOVE",
    "BLOCKS_STRIPS",
    "BUILDERS",
    "DWR",
    "LOGISTICS",
    "build_blocks_move",
    "build_blocks_strips",
    "build_dwr",
    "build_logistics",
]
