"""Data models for channels, trees, selections, regions and simulations"""
from .erasure_channel import ErasureChannel
from .dice import DiceDistribution
from .channel_tree import ChannelTree, MergedTree, CodeSpec
from .selection import SelectionParams, SelectionDiagnostics, RoundRecord
from .tradeoff_region import TradeoffRegion
from .simulation import SimConfig, SimReport, UnionBoundReport

__all__ = ['ErasureChannel', 'DiceDistribution', 'ChannelTree', 'MergedTree', 'CodeSpec',
           'SelectionParams', 'SelectionDiagnostics', 'RoundRecord', 'TradeoffRegion',
           'SimConfig', 'SimReport', 'UnionBoundReport']
