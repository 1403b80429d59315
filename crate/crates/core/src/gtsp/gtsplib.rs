//! GTSPLIB-style text dump of an instance. Node and set ids are 1-based; node 1 in set 1
//! is the start. Cost overrides are not persisted.

use std::fmt::Write as _;

use super::GtspInstance;
use crate::error::GtspError;
use crate::voxel::Position;

pub fn to_gtsplib(instance: &GtspInstance, name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "NAME: {name}");
    let _ = writeln!(s, "TYPE: GTSP");
    let _ = writeln!(s, "DIMENSION: {}", instance.vertex_count());
    let _ = writeln!(s, "GTSP_SETS: {}", instance.cluster_count());
    let _ = writeln!(s, "EDGE_WEIGHT_TYPE: EUC_3D");
    let _ = writeln!(s, "VOXEL_SIZE: {}", instance.voxel_size());
    let _ = writeln!(s, "NODE_COORD_SECTION");
    for (i, v) in instance.vertices().iter().enumerate() {
        let p = v.position;
        let _ = writeln!(s, "{} {} {} {}", i + 1, p.x, p.y, p.z);
    }
    let _ = writeln!(s, "GTSP_SET_SECTION");
    for (c, members) in instance.clusters().iter().enumerate() {
        let _ = write!(s, "{}", c + 1);
        for v in members {
            let _ = write!(s, " {}", v + 1);
        }
        let _ = writeln!(s, " -1");
    }
    s.push_str("EOF\n");
    s
}

fn err(line: usize, reason: impl Into<String>) -> GtspError {
    GtspError::Format {
        line,
        reason: reason.into(),
    }
}

pub fn from_gtsplib(text: &str) -> Result<GtspInstance, GtspError> {
    #[derive(PartialEq)]
    enum Section {
        Header,
        Nodes,
        Sets,
        Done,
    }
    let mut section = Section::Header;
    let mut dimension: Option<usize> = None;
    let mut n_sets: Option<usize> = None;
    let mut voxel_size = 1.0;
    let mut points: Vec<Option<Position>> = Vec::new();
    let mut clusters: Vec<Option<Vec<usize>>> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "NODE_COORD_SECTION" => {
                let n = dimension.ok_or_else(|| err(line_no, "DIMENSION missing"))?;
                points = vec![None; n];
                section = Section::Nodes;
                continue;
            }
            "GTSP_SET_SECTION" => {
                let n = n_sets.ok_or_else(|| err(line_no, "GTSP_SETS missing"))?;
                clusters = vec![None; n];
                section = Section::Sets;
                continue;
            }
            "EOF" => {
                section = Section::Done;
                break;
            }
            _ => {}
        }
        match section {
            Section::Header => {
                let (key, value) = line
                    .split_once(':')
                    .ok_or_else(|| err(line_no, "expected KEY: VALUE"))?;
                let value = value.trim();
                let number = |v: &str| {
                    v.parse::<usize>()
                        .map_err(|_| err(line_no, format!("bad integer `{v}`")))
                };
                match key.trim() {
                    "NAME" | "COMMENT" => {}
                    "TYPE" if value == "GTSP" => {}
                    "EDGE_WEIGHT_TYPE" if value == "EUC_3D" => {}
                    "DIMENSION" => dimension = Some(number(value)?),
                    "GTSP_SETS" => n_sets = Some(number(value)?),
                    "VOXEL_SIZE" => {
                        voxel_size = value
                            .parse()
                            .ok()
                            .filter(|v: &f64| *v > 0.0)
                            .ok_or_else(|| err(line_no, "bad VOXEL_SIZE"))?
                    }
                    k => return Err(err(line_no, format!("unsupported header `{k}: {value}`"))),
                }
            }
            Section::Nodes => {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 4 {
                    return Err(err(line_no, "node line needs id x y z"));
                }
                let id: usize = f[0].parse().map_err(|_| err(line_no, "bad node id"))?;
                let mut xyz = [0.0; 3];
                for (k, s) in f[1..].iter().enumerate() {
                    xyz[k] = s
                        .parse()
                        .map_err(|_| err(line_no, format!("bad coordinate `{s}`")))?;
                }
                let slot = id
                    .checked_sub(1)
                    .and_then(|j| points.get_mut(j))
                    .ok_or_else(|| err(line_no, format!("node id {id} out of range")))?;
                if slot.replace(Position::new(xyz[0], xyz[1], xyz[2])).is_some() {
                    return Err(err(line_no, format!("node {id} listed twice")));
                }
            }
            Section::Sets => {
                let mut f = line.split_whitespace();
                let id: usize = f
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(line_no, "bad set id"))?;
                let mut members = Vec::new();
                let mut terminated = false;
                for s in f {
                    if s == "-1" {
                        terminated = true;
                        break;
                    }
                    let v: usize = s
                        .parse()
                        .ok()
                        .filter(|v| *v >= 1)
                        .ok_or_else(|| err(line_no, format!("bad node id `{s}`")))?;
                    members.push(v - 1);
                }
                if !terminated {
                    return Err(err(line_no, "set line must end with -1"));
                }
                let slot = id
                    .checked_sub(1)
                    .and_then(|j| clusters.get_mut(j))
                    .ok_or_else(|| err(line_no, format!("set id {id} out of range")))?;
                if slot.replace(members).is_some() {
                    return Err(err(line_no, format!("set {id} listed twice")));
                }
            }
            Section::Done => unreachable!(),
        }
    }
    if section != Section::Done {
        return Err(err(text.lines().count(), "missing EOF"));
    }
    let points: Vec<Position> = points
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| err(0, format!("node {} has no coordinates", i + 1))))
        .collect::<Result<_, _>>()?;
    let clusters: Vec<Vec<usize>> = clusters
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| err(0, format!("set {} missing", i + 1))))
        .collect::<Result<_, _>>()?;
    GtspInstance::from_points(&points, &clusters, voxel_size)
}
