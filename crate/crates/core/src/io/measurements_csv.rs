//! Long-format measurement CSV: one quantity per row.
//!
//! ```text
//! part_id,cell_type,quantity,value
//! P1,*,vdd_mV,1200
//! P1,SS,ser_uSEU_per_bit_s,1.46
//! P1,SS,rel_stat_unc,0.02
//! P1,SS,v_mewlvm_mV,791
//! P1,SS,sigma_wlvm_mV,44
//! ```
//!
//! Part-wide quantities (`vdd_mV`, `rel_geom_unc`) use `*` as the cell type.
//! Lines starting with `#` are comments.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::{MarginRecord, PartDataset, SerRecord};
use crate::error::{Error, Result};
use crate::sram_model::CellTypeName;
use crate::units::Millivolts;

const HEADER: [&str; 4] = ["part_id", "cell_type", "quantity", "value"];
const PART_WIDE: &str = "*";
const DEFAULT_VDD: Millivolts = Millivolts(1200);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    Ser,
    RelStatUnc,
    VMewlvm,
    SigmaWlvm,
    Vdd,
    RelGeomUnc,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Ser => "ser_uSEU_per_bit_s",
            Quantity::RelStatUnc => "rel_stat_unc",
            Quantity::VMewlvm => "v_mewlvm_mV",
            Quantity::SigmaWlvm => "sigma_wlvm_mV",
            Quantity::Vdd => "vdd_mV",
            Quantity::RelGeomUnc => "rel_geom_unc",
        }
    }

    fn part_wide(self) -> bool {
        matches!(self, Quantity::Vdd | Quantity::RelGeomUnc)
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            Quantity::Ser,
            Quantity::RelStatUnc,
            Quantity::VMewlvm,
            Quantity::SigmaWlvm,
            Quantity::Vdd,
            Quantity::RelGeomUnc,
        ]
        .into_iter()
        .find(|q| q.as_str() == s)
        .ok_or_else(|| format!("unknown quantity `{s}`"))
    }
}

pub fn ingest_measurements_csv(path: impl AsRef<Path>) -> Result<Vec<PartDataset>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_measurements_csv(file, &path.display().to_string())
}

#[derive(Default)]
struct PartRows {
    values: BTreeMap<(Option<CellTypeName>, Quantity), (f64, u64)>,
}

/// Parse the long-format schema. `source_name` is used in error messages.
pub fn parse_measurements_csv<R: Read>(input: R, source_name: &str) -> Result<Vec<PartDataset>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let parse_err = |line: u64, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };

    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(parse_err(1, format!("expected header `{}`", HEADER.join(","))));
    }

    let mut order: Vec<String> = Vec::new();
    let mut parts: HashMap<String, PartRows> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 4 {
            return Err(parse_err(line, format!("expected 4 fields, found {}", rec.len())));
        }
        let part_id = rec[0].to_string();
        if part_id.is_empty() {
            return Err(parse_err(line, "empty part_id".into()));
        }
        let quantity: Quantity = rec[2].parse().map_err(|m| parse_err(line, m))?;
        let cell_type = if &rec[1] == PART_WIDE {
            None
        } else {
            Some(
                rec[1]
                    .parse::<CellTypeName>()
                    .map_err(|_| parse_err(line, format!("unknown cell type `{}`", &rec[1])))?,
            )
        };
        if quantity.part_wide() != cell_type.is_none() {
            return Err(parse_err(
                line,
                if quantity.part_wide() {
                    format!("{} is part-wide; use `*` as the cell type", quantity.as_str())
                } else {
                    format!("{} needs a cell type", quantity.as_str())
                },
            ));
        }
        let value: f64 = rec[3]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(line, format!("non-numeric value `{}`", &rec[3])))?;
        check_range(quantity, value).map_err(|m| parse_err(line, m))?;

        let rows = parts.entry(part_id.clone()).or_insert_with(|| {
            order.push(part_id.clone());
            PartRows::default()
        });
        if let Some((_, first)) = rows.values.insert((cell_type, quantity), (value, line)) {
            return Err(parse_err(
                line,
                format!(
                    "duplicate {} for part {part_id} {} (first at line {first})",
                    quantity.as_str(),
                    cell_type.map_or(PART_WIDE, |t| t.as_str())
                ),
            ));
        }
    }

    order.sort();
    let mut out = Vec::with_capacity(order.len());
    for part_id in order {
        let rows = &parts[&part_id];
        out.push(assemble(&part_id, rows).map_err(|(line, m)| parse_err(line, m))?);
    }
    Ok(out)
}

fn check_range(q: Quantity, v: f64) -> std::result::Result<(), String> {
    let ok = match q {
        Quantity::Ser => v >= 0.0,
        Quantity::RelStatUnc | Quantity::RelGeomUnc => v >= 0.0,
        Quantity::SigmaWlvm => v >= 0.0,
        Quantity::VMewlvm => v > 0.0,
        Quantity::Vdd => v > 0.0 && v.fract() == 0.0 && v <= f64::from(i32::MAX),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{} out of range: {v}", q.as_str()))
    }
}

fn assemble(part_id: &str, rows: &PartRows) -> std::result::Result<PartDataset, (u64, String)> {
    let get = |t: Option<CellTypeName>, q: Quantity| rows.values.get(&(t, q)).copied();
    let v_dd = get(None, Quantity::Vdd).map_or(DEFAULT_VDD, |(v, _)| Millivolts(v as i32));
    let mut ds = PartDataset::new(part_id, v_dd);
    ds.rel_geom_unc = get(None, Quantity::RelGeomUnc).map(|(v, _)| v);

    for t in CellTypeName::ALL {
        let ser = get(Some(t), Quantity::Ser);
        let rel = get(Some(t), Quantity::RelStatUnc);
        let mu = get(Some(t), Quantity::VMewlvm);
        let sigma = get(Some(t), Quantity::SigmaWlvm);
        if let (None, Some((_, line))) = (ser, rel) {
            return Err((line, format!("rel_stat_unc for {part_id} {t} without an SER value")));
        }
        if let (None, Some((_, line))) = (mu, sigma) {
            return Err((line, format!("sigma_wlvm_mV for {part_id} {t} without v_mewlvm_mV")));
        }
        if let Some((ser, _)) = ser {
            ds.set_ser(
                t,
                SerRecord {
                    ser,
                    rel_stat_unc: rel.map(|(v, _)| v),
                },
            );
        }
        if let Some((mu, _)) = mu {
            ds.set_margin(
                t,
                MarginRecord {
                    v_mewlvm_mv: mu,
                    sigma_mv: sigma.map(|(v, _)| v),
                },
            );
        }
    }
    Ok(ds)
}

/// Write datasets in the long-format schema, ordered by part then cell type.
pub fn write_measurements_csv<W: Write>(datasets: &[PartDataset], out: W) -> Result<()> {
    let mut sorted: Vec<&PartDataset> = datasets.iter().collect();
    sorted.sort_by(|a, b| a.part_id.cmp(&b.part_id));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for ds in sorted {
        let mut row = |t: &str, q: Quantity, v: String| w.write_record([ds.part_id.as_str(), t, q.as_str(), &v]);
        row(PART_WIDE, Quantity::Vdd, ds.v_dd.get().to_string())?;
        if let Some(g) = ds.rel_geom_unc {
            row(PART_WIDE, Quantity::RelGeomUnc, g.to_string())?;
        }
        for (t, rec) in &ds.types {
            if let Some(s) = &rec.ser {
                row(t.as_str(), Quantity::Ser, s.ser.to_string())?;
                if let Some(r) = s.rel_stat_unc {
                    row(t.as_str(), Quantity::RelStatUnc, r.to_string())?;
                }
            }
            if let Some(m) = &rec.margin {
                row(t.as_str(), Quantity::VMewlvm, m.v_mewlvm_mv.to_string())?;
                if let Some(s) = m.sigma_mv {
                    row(t.as_str(), Quantity::SigmaWlvm, s.to_string())?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io("measurements csv", e))?;
    Ok(())
}
