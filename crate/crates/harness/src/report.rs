//! CSV step tables and JSON summaries.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::run::{Algo, StepReport, Summary};

pub const CSV_HEADER: &str = "t,algo,cost,mst,opt,lb,churn,swaps,splices,zt,fails";

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    t: usize,
    algo: Algo,
    cost: u64,
    mst: u64,
    opt: Option<u64>,
    lb: Option<u128>,
    churn: usize,
    swaps: usize,
    splices: usize,
    zt: usize,
    fails: String,
}

pub fn write_csv<W: Write>(w: W, steps: &[StepReport]) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(CSV_HEADER.split(','))?;
    for s in steps {
        out.serialize(Row {
            t: s.t,
            algo: s.algo,
            cost: s.cost,
            mst: s.mst,
            opt: s.opt,
            lb: s.lb,
            churn: s.churn,
            swaps: s.swaps,
            splices: s.splices,
            zt: s.zt,
            fails: s.fails.join(";"),
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> csv::Result<Vec<StepReport>> {
    csv::Reader::from_reader(r)
        .deserialize::<Row>()
        .map(|row| {
            row.map(|r| StepReport {
                t: r.t,
                algo: r.algo,
                cost: r.cost,
                mst: r.mst,
                opt: r.opt,
                lb: r.lb,
                churn: r.churn,
                swaps: r.swaps,
                splices: r.splices,
                zt: r.zt,
                fails: if r.fails.is_empty() { Vec::new() } else { r.fails.split(';').map(str::to_owned).collect() },
            })
        })
        .collect()
}

pub fn csv_string(steps: &[StepReport]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, steps).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

pub fn write_summary<W: Write>(w: W, summary: &Summary) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(w, summary)
}
