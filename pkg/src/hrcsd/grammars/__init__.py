from .cftg import (Derivation, GrammarError, LmCftg, MetaInfo, PumpingDecomposition, PumpingError, Rule,
                   contains_tree, derive_bounded, grammar_to_text, l0_bound, parse_grammar, pump,
                   pump_candidates, pump_decompose, pumping_height, realize, rule_emission)
from .relation import (AlignmentReport, RelationPair, build_relation, derivations, hom_to_text, is_aligned,
                       parse_hom)
from .tag import (ElementaryTree, TagError, TagGrammar, TagNode, derivation_spans, derive_tag,
                  non_projective_witness, parse_tag, tag_realize, tag_to_text, tag_yield)
