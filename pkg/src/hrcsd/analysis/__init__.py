"""Executable checkers for the proof-side definitions and lemmas."""
from .boundary import check_boundary, random_hr_term
from .distance import (Alignment, AlignmentError, DistanceReport, Lemma4Result, PreconditionError, align,
                       check_lemma2, check_lemma2_half, check_lemma4_instance, distant_witness_check, identity_hom, max_distance,
                       random_graph_term, sample_qualifying_subset, split_blocks)
from .profiles import CountProfile, count_profile, graphof, hom_with_hole, runs
from .pumping import check_downward_separation, classify_pump_case, in_segments, pump_audit
from .report import FAIL, INAPPLICABLE, PASS, CheckResult, Report
from .separation import (SEP_PAIRS, Separation, Split, all_separations, async_bounds, check_asynchronous,
                         check_inductive_bounds, check_separation_chain, find_separation, is_async_split,
                         is_separation, minimal_separations)
from .suites import SUITES, lemma2_counterexample, run_suite, two_block_toy
