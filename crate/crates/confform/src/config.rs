//! Flat key-value configuration files with `#` comments.
//!
//! A triple-junction spec has one `[component.N]` section per component
//! (N = 1..3) plus root-level keys:
//!
//! ```text
//! junction_samples = 64
//!
//! [component.1]
//! kind = mesh
//! generator = torus        # or: path = sigma1.off
//! major_radius = 2.0
//! minor_radius = 0.7
//! nu = 16
//! nv = 16
//! hole_faces = 6
//!
//! [component.2]
//! kind = disk
//! ```
//!
//! A bare mesh config is the same component key set without a section
//! header, accepted anywhere a `--mesh` path is, via the `.cfg` extension.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::junction::{SurfaceComponent, TripleJunctionSpec};
use crate::mesh::{
    generate_flat_torus_with_hole, generate_genus2_with_hole, generate_torus_with_hole,
    load_mesh, TriangleMesh,
};

#[derive(Debug, Clone)]
struct Section {
    name: String,
    entries: Vec<(String, String)>,
}

fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections = vec![Section {
        name: String::new(),
        entries: Vec::new(),
    }];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(Error::Config(format!(
                    "line {}: unterminated section header",
                    lineno + 1
                )));
            }
            sections.push(Section {
                name: line[1..line.len() - 1].trim().to_string(),
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got {line:?}",
                lineno + 1
            )));
        };
        sections
            .last_mut()
            .unwrap()
            .entries
            .push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(sections)
}

fn get<'a>(entries: &'a [(String, String)], key: &str) -> Option<&'a str> {
    entries
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

fn get_f64(entries: &[(String, String)], key: &str, default: f64) -> Result<f64> {
    match get(entries, key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("key {key} must be a number, got {v:?}"))),
    }
}

fn get_usize(entries: &[(String, String)], key: &str, default: usize) -> Result<usize> {
    match get(entries, key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("key {key} must be an integer, got {v:?}"))),
    }
}

/// How one mesh is obtained.
#[derive(Debug, Clone)]
pub enum MeshSource {
    Path(PathBuf),
    Torus {
        major_radius: f64,
        minor_radius: f64,
        nu: usize,
        nv: usize,
        hole_faces: usize,
    },
    FlatTorus {
        nu: usize,
        nv: usize,
        hole_faces: usize,
    },
    Genus2 {
        major_radius: f64,
        minor_radius: f64,
        nu: usize,
        nv: usize,
    },
}

impl MeshSource {
    fn from_entries(entries: &[(String, String)], base_dir: &Path) -> Result<MeshSource> {
        if let Some(path) = get(entries, "path") {
            return Ok(MeshSource::Path(base_dir.join(path)));
        }
        let generator = get(entries, "generator").ok_or_else(|| {
            Error::Config("mesh component needs `path` or `generator`".into())
        })?;
        let major = get_f64(entries, "major_radius", 2.0)?;
        let minor = get_f64(entries, "minor_radius", 0.7)?;
        let nu = get_usize(entries, "nu", 16)?;
        let nv = get_usize(entries, "nv", 16)?;
        let hole = get_usize(entries, "hole_faces", 6)?;
        match generator {
            "torus" => Ok(MeshSource::Torus {
                major_radius: major,
                minor_radius: minor,
                nu,
                nv,
                hole_faces: hole,
            }),
            "flat_torus" => Ok(MeshSource::FlatTorus {
                nu,
                nv,
                hole_faces: hole,
            }),
            "genus2" => Ok(MeshSource::Genus2 {
                major_radius: major,
                minor_radius: minor,
                nu,
                nv,
            }),
            other => Err(Error::Config(format!("unknown generator {other:?}"))),
        }
    }

    pub fn build(&self) -> Result<TriangleMesh<f64>> {
        match self {
            MeshSource::Path(path) => load_mesh(path),
            MeshSource::Torus {
                major_radius,
                minor_radius,
                nu,
                nv,
                hole_faces,
            } => generate_torus_with_hole(*major_radius, *minor_radius, *nu, *nv, *hole_faces),
            MeshSource::FlatTorus { nu, nv, hole_faces } => {
                generate_flat_torus_with_hole(*nu, *nv, *hole_faces)
            }
            MeshSource::Genus2 {
                major_radius,
                minor_radius,
                nu,
                nv,
            } => generate_genus2_with_hole(*major_radius, *minor_radius, *nu, *nv),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ComponentConfig {
    Mesh(MeshSource),
    Disk,
}

impl ComponentConfig {
    pub fn build(&self, id: &str) -> Result<SurfaceComponent<f64>> {
        match self {
            ComponentConfig::Disk => Ok(SurfaceComponent::disk(id)),
            ComponentConfig::Mesh(source) => SurfaceComponent::from_mesh(id, source.build()?),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TripleConfig {
    pub junction_samples: usize,
    pub components: [ComponentConfig; 3],
}

impl TripleConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<TripleConfig> {
        let sections = parse_sections(text)?;
        let junction_samples = get_usize(&sections[0].entries, "junction_samples", 64)?;
        let mut components: Vec<ComponentConfig> = Vec::new();
        for n in 1..=3 {
            let name = format!("component.{n}");
            let section = sections
                .iter()
                .find(|s| s.name == name)
                .ok_or_else(|| Error::Config(format!("missing section [{name}]")))?;
            let kind = get(&section.entries, "kind")
                .ok_or_else(|| Error::Config(format!("[{name}] needs `kind = mesh|disk`")))?;
            match kind {
                "disk" => components.push(ComponentConfig::Disk),
                "mesh" => components.push(ComponentConfig::Mesh(MeshSource::from_entries(
                    &section.entries,
                    base_dir,
                )?)),
                other => {
                    return Err(Error::Config(format!(
                        "[{name}] kind must be mesh or disk, got {other:?}"
                    )))
                }
            }
        }
        Ok(TripleConfig {
            junction_samples,
            components: components.try_into().map_err(|_| ()).expect("three components"),
        })
    }

    pub fn load(path: &Path) -> Result<TripleConfig> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        TripleConfig::parse(&text, base)
    }

    pub fn build_spec(&self) -> Result<TripleJunctionSpec<f64>> {
        let ids = ["component.1", "component.2", "component.3"];
        let mut built = Vec::with_capacity(3);
        for (cfg, id) in self.components.iter().zip(ids) {
            built.push(cfg.build(id)?);
        }
        TripleJunctionSpec::new(
            built.try_into().map_err(|_| ()).expect("three components"),
            self.junction_samples,
        )
    }
}

/// Loads a mesh from an OFF file, or from a bare key-value config (keys as
/// in a mesh component section) when the path does not end in `.off`.
pub fn load_mesh_source(path: &Path) -> Result<TriangleMesh<f64>> {
    let is_off = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("off"))
        .unwrap_or(false);
    if is_off {
        load_mesh(path)
    } else {
        let text = std::fs::read_to_string(path)?;
        let sections = parse_sections(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        MeshSource::from_entries(&sections[0].entries, base)?.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_triple_config() {
        let text = "\
# three components
junction_samples = 32

[component.1]
kind = mesh
generator = flat_torus
nu = 10
nv = 10
hole_faces = 6

[component.2]
kind = disk

[component.3]
kind = mesh
generator = torus
nu = 12
nv = 12
";
        let cfg = TripleConfig::parse(text, Path::new(".")).unwrap();
        assert_eq!(cfg.junction_samples, 32);
        assert!(matches!(cfg.components[1], ComponentConfig::Disk));
        let spec = cfg.build_spec().unwrap();
        assert_eq!(spec.chi_m(), -1);
    }

    #[test]
    fn rejects_missing_section_and_bad_kind() {
        let text = "[component.1]\nkind = mesh\npath = x.off\n";
        assert!(TripleConfig::parse(text, Path::new(".")).is_err());
        let text = "[component.1]\nkind = blob\n[component.2]\nkind = disk\n[component.3]\nkind = disk\n";
        assert!(TripleConfig::parse(text, Path::new(".")).is_err());
    }
}
