use anyhow::Result;
use mamid_core::dataset::{synth_generate, write_csv, SynthSpec};

use crate::args::SynthArgs;
use crate::layout::StageWriter;

pub fn run(args: &SynthArgs) -> Result<()> {
    let spec = SynthSpec::iotid20_like(args.separation);
    let table = synth_generate(&spec, args.rows, args.common.seed)?;
    let mut stage = StageWriter::new(&args.common.out, "synth")?;
    let path = stage.artifact("flows.csv")?;
    write_csv(&table, &path)?;
    stage.finish(args)?;
    println!("wrote {} synthetic flows to {}", table.len(), path.display());
    Ok(())
}
