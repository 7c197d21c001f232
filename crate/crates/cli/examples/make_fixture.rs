//! Regenerates the bundled synthetic quarterly fixture.
//!
//! The ordinal path is simulated from the Model 5 parameters in
//! `data/model5_frank.json`; each state is then replaced by a value drawn
//! uniformly inside its unemployment-rate interval and rounded to two
//! decimals. The first seed whose path visits every state of both series
//! is used.
//!
//! ```text
//! cargo run -p bdar-cli --example make_fixture
//! ```

use std::path::Path;

use bdar::model::simulate;
use bdar::rng::substream;
use bdar_cli::commands::load_params;
use bdar_cli::data::{state_of, UNEMPLOYMENT_BREAKPOINTS};
use rand::Rng;

const LENGTH: usize = 104;

fn main() -> anyhow::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let params = load_params(&root.join("model5_frank.json"))?;
    let (seed, series) = (0u64..)
        .map(|seed| (seed, simulate(&params, LENGTH, 0, &mut substream(seed, "fixture", 0))))
        .find_map(|(seed, s)| match s {
            Ok(s) if s.first_unobserved_state().is_none() => Some(Ok((seed, s))),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        })
        .expect("an unbounded seed search")?;

    let b = UNEMPLOYMENT_BREAKPOINTS;
    let mut rng = substream(seed, "fixture-values", 0);
    let mut value = |state: usize| {
        let (lo, hi) = (b[state - 1], b[state]);
        let y = ((lo + rng.gen_range(0.05..0.95) * (hi - lo)) * 100.0).round() / 100.0;
        assert_eq!(state_of(y, &b), Some(state));
        y
    };
    let mut w = csv::Writer::from_path(root.join("fixture_quarterly.csv"))?;
    w.write_record(["quarter", "series1", "series2"])?;
    for t in 0..series.len() {
        let (a, c) = series.pair(t);
        let quarter = format!("{}Q{}", 1998 + t / 4, t % 4 + 1);
        w.write_record([quarter, format!("{:.2}", value(a)), format!("{:.2}", value(c))])?;
    }
    w.flush()?;
    println!("seed {seed}: wrote {} rows", series.len());
    Ok(())
}
