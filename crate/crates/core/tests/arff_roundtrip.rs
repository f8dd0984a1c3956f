mod common;

use imbalkit::ingest::{parse_arff, write_arff};

use common::generate;

#[test]
fn serialize_parse_identity_on_200_files() {
    for seed in 0..200 {
        let table = generate(seed);
        let text = write_arff(&table);
        let (header, parsed) = parse_arff(text.as_bytes()).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
        assert_eq!(parsed, table, "seed {seed}");
        assert_eq!(header.attributes.len(), table.n_columns());
        assert_eq!(write_arff(&parsed), text, "seed {seed}");
    }
}
