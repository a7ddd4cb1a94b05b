"""Epsilon-machines of stationary symbolic processes."""

from .derivation import (
    captures_pattern,
    derive_epsilon_machine,
    history_future_table,
    partition_by_future_equivalence,
    stabilization_scan,
)
from .errors import (
    AlphabetMismatch,
    BlockTooLarge,
    CMechError,
    DeterminizationDiverged,
    InvalidSpec,
    MultipleRecurrentClasses,
    NonDeterministicAtHorizon,
    SequenceTooShort,
    TooManyHistories,
    ZeroProbabilityHistory,
)
from .information import (
    Distribution,
    JointTable,
    block_entropy,
    conditional_entropy,
    entropy,
    excess_entropy_estimate,
    mutual_information,
)
from .machine import (
    EpsilonMachine,
    as_process,
    check_determinism,
    isomorphism,
    state_transition_entropy,
    statistical_complexity,
)
from .oracle import enumerate_partitions, partition_complexity, prescience, verify_all
from .partition import Partition
from .process import (
    Alphabet,
    ProcessSpec,
    conditional_future_distribution,
    load_process,
    preset,
    sample,
    stationary_distribution,
    word_probability,
)
from .reconstruction import CountTable, count_windows, merge_histories, reconstruct

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "AlphabetMismatch",
    "as_process",
    "block_entropy",
    "BlockTooLarge",
    "captures_pattern",
    "check_determinism",
    "CMechError",
    "conditional_entropy",
    "conditional_future_distribution",
    "count_windows",
    "CountTable",
    "derive_epsilon_machine",
    "DeterminizationDiverged",
    "Distribution",
    "entropy",
    "enumerate_partitions",
    "EpsilonMachine",
    "excess_entropy_estimate",
    "history_future_table",
    "InvalidSpec",
    "isomorphism",
    "JointTable",
    "load_process",
    "merge_histories",
    "MultipleRecurrentClasses",
    "mutual_information",
    "NonDeterministicAtHorizon",
    "Partition",
    "partition_by_future_equivalence",
    "partition_complexity",
    "prescience",
    "preset",
    "ProcessSpec",
    "reconstruct",
    "sample",
    "SequenceTooShort",
    "stabilization_scan",
    "state_transition_entropy",
    "stationary_distribution",
    "statistical_complexity",
    "TooManyHistories",
    "verify_all",
    "word_probability",
    "ZeroProbabilityHistory",
]
