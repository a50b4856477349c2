//! Built-in fixture graphs used by tests, docs and the README examples.

use crate::graph::GraphDb;

/// A small bibliographic graph in the style of an RDF export: papers with
/// `creator` edges to their authors, and conference papers additionally
/// linked through `partOf`/`series` to their venue.
///
/// The shape is chosen so that:
/// * Ullman and Fagin each authored a conference paper (focs resp. pods);
/// * Hopcroft and Vardi share a conference paper, Vardi and Wolper share
///   a journal paper (no `partOf`), so Hopcroft reaches Wolper by a
///   coauthorship sequence but not by one restricted to conference papers.
pub fn bibliography() -> GraphDb {
    GraphDb::from_tsv(BIBLIOGRAPHY_TSV).expect("fixture graph parses")
}

/// The same graph as a TSV document, for CLI examples.
pub const BIBLIOGRAPHY_TSV: &str = "\
paper:HopcroftVardi79\tcreator\t:John_E._Hopkroft
paper:HopcroftVardi79\tcreator\t:Moshe_Y._Vardi
paper:HopcroftVardi79\tpartOf\tproc:focs79
proc:focs79\tseries\tconf:focs
paper:VardiWolper94\tcreator\t:Moshe_Y._Vardi
paper:VardiWolper94\tcreator\t:Pierre_Wolper
paper:Ullman82\tcreator\t:Jeffrey_D._Ullman
paper:Ullman82\tpartOf\tproc:focs82
proc:focs82\tseries\tconf:focs
paper:Fagin84\tcreator\t:Ronald_Fagin
paper:Fagin84\tpartOf\tproc:pods84
proc:pods84\tseries\tconf:pods
";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_parses() {
        let g = bibliography();
        assert!(g.has_node(":John_E._Hopkroft"));
        assert!(g.has_node("conf:pods"));
        assert_eq!(g.labels(), vec!["creator", "partOf", "series"]);
    }
}
