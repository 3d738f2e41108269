"""
Seeded experiments: approximate influence of one perturbed update
(table2) and iteration counts under noisy line searches (table3).
"""
from bregqn.experiments.output import to_json, write_table2, write_table3
from bregqn.experiments.table2 import Setup, Table2Config, Table2Result, TrialRecord, run_table2
from bregqn.experiments.table3 import (
    RunRecord,
    Table3Config,
    Table3Result,
    popular_self_scaling_update,
    run_table3,
)

__all__ = [
    'to_json', 'write_table2', 'write_table3',
    'Setup', 'Table2Config', 'Table2Result', 'TrialRecord', 'run_table2',
    'RunRecord', 'Table3Config', 'Table3Result', 'popular_self_scaling_update', 'run_table3',
]
