//! Regenerates the benchmark data files under `data/`.

use std::path::Path;

use hypocal::data::write_data;
use hypocal_core::benchmark::{hochstetten_surrogate, synthetic_dataset};

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for (dir, data) in [
        ("synthetic", synthetic_dataset()),
        ("hochstetten", hochstetten_surrogate()),
    ] {
        for test in data.tests() {
            let path = root.join(dir).join(format!("{}.csv", test.name));
            write_data(&path, &test.curves).expect("writable data directory");
            println!("{}", path.display());
        }
    }
}
