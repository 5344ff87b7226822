//! Reference trees with known metric values.

use crate::deptree::{DepTree, Meta, Token};

/// "Es gibt drei Runden": length 4, three heads, depth 3.
pub fn es_gibt_drei_runden() -> DepTree {
    let tokens = vec![
        Token::new(1, "Es", "PRON", 2).with_deprel("expl"),
        Token::new(2, "gibt", "VERB", 0)
            .with_deprel("root")
            .with_feat("VerbForm", "Fin"),
        Token::new(3, "drei", "NUM", 4).with_deprel("nummod"),
        Token::new(4, "Runden", "NOUN", 2).with_deprel("obj"),
    ];
    DepTree::new(tokens, Meta::new())
}

/// Eight words, four heads, depth 4: the sentence root governs four
/// leaves and a three-arc chain.
pub fn eight_token_example() -> DepTree {
    let words = [
        ("Wir", "PRON", 2),
        ("haben", "VERB", 0),
        ("heute", "ADV", 2),
        ("Karten", "NOUN", 2),
        ("mit", "ADP", 4),
        ("Bildern", "NOUN", 5),
        ("sehr", "ADV", 2),
        ("gern", "ADV", 2),
    ];
    let tokens = words
        .iter()
        .enumerate()
        .map(|(i, &(form, upos, head))| Token::new(i + 1, form, upos, head))
        .collect();
    DepTree::new(tokens, Meta::new())
}
