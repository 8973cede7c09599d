mod common;

use proptest::prelude::*;

use auction_core::ledger::{
    append_record, load_ledger, parse_ledger, render_ledger, settle, FixedClock, LedgerError,
};
use auction_core::market::Money;
use auction_core::{run_auction, Mechanism};

use common::ex1;

fn clock() -> FixedClock {
    FixedClock::parse("2024-01-01T00:00:00Z").unwrap()
}

fn mechanism(k: u8) -> Mechanism {
    match k % 3 {
        0 => Mechanism::Vcg,
        1 => Mechanism::FirstPrice,
        _ => Mechanism::PostedPrice { markup_bp: 2500 },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn appends_only_extend_the_file(
        runs in prop::collection::vec((any::<u8>(), 1500u64..2500), 1..6),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.jsonl");
        let mut previous = Vec::new();
        for (i, (k, budget)) in runs.iter().enumerate() {
            let s = ex1().with_budget(Money(*budget)).unwrap();
            let outcome = run_auction(&s, mechanism(*k));
            let rec = append_record(&path, &outcome, &clock()).unwrap();
            prop_assert_eq!(rec.record_id, i as u64 + 1);
            let bytes = std::fs::read(&path).unwrap();
            prop_assert!(bytes.starts_with(&previous));
            previous = bytes;
        }
        let records = load_ledger(&path).unwrap();
        prop_assert_eq!(render_ledger(&records).into_bytes(), previous);
    }

    #[test]
    fn any_torn_suffix_is_rejected(cut in 1usize..2000) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.jsonl");
        append_record(&path, &run_auction(&ex1(), Mechanism::Vcg), &clock()).unwrap();
        append_record(&path, &run_auction(&ex1(), Mechanism::FirstPrice), &clock()).unwrap();
        settle(&path, 1, "ref-1", &clock()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let at = cut % bytes.len();
        let prefix = &bytes[..at];
        let whole_lines = prefix.is_empty() || prefix.ends_with(b"\n");
        match parse_ledger(prefix) {
            Ok(records) => {
                prop_assert!(whole_lines);
                let rendered = render_ledger(&records);
                prop_assert_eq!(rendered.as_bytes(), prefix);
            }
            Err(LedgerError::Corrupt { .. }) => prop_assert!(!whole_lines),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn settling_twice_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.jsonl");
    append_record(&path, &run_auction(&ex1(), Mechanism::Vcg), &clock()).unwrap();
    settle(&path, 1, "a", &clock()).unwrap();
    assert!(matches!(
        settle(&path, 1, "b", &clock()),
        Err(LedgerError::AlreadySettled(1))
    ));
    assert!(matches!(
        settle(&path, 2, "b", &clock()),
        Err(LedgerError::AlreadySettled(2))
    ));
}
