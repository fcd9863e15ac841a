use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{GenerationRequest, Provider, ProviderConfig, ProviderError};

/// Canned responses keyed by case and sample index.
///
/// On disk the table is `<script>/<case>/<index>.txt`, with an optional
/// `<script>/<case>/any.txt` used for indices that have no file of their own.
/// Feedback rounds read `<index>.<round>.txt` when present and otherwise get
/// the initial response again.
pub struct ScriptedProvider {
    cfg: ProviderConfig,
    table: BTreeMap<(String, u32), String>,
    rounds: BTreeMap<(String, u32, u32), String>,
    fallback: BTreeMap<String, String>,
}

impl ScriptedProvider {
    pub fn from_table(cfg: ProviderConfig, table: BTreeMap<(String, u32), String>) -> Self {
        ScriptedProvider { cfg, table, rounds: BTreeMap::new(), fallback: BTreeMap::new() }
    }

    pub fn from_dir(cfg: ProviderConfig) -> Result<Self, ProviderError> {
        let root = cfg.script.clone().ok_or_else(|| ProviderError::Config("scripted provider needs a script directory".into()))?;
        let Tables { table, rounds, fallback } = load_script(&root)?;
        Ok(ScriptedProvider { cfg, table, rounds, fallback })
    }
}

#[derive(Default)]
struct Tables {
    table: BTreeMap<(String, u32), String>,
    rounds: BTreeMap<(String, u32, u32), String>,
    fallback: BTreeMap<String, String>,
}

fn parse_stem(stem: &str) -> Option<(u32, u32)> {
    match stem.split_once('.') {
        Some((i, r)) => Some((i.parse().ok()?, r.parse().ok()?)),
        None => Some((stem.parse().ok()?, 0)),
    }
}

fn load_script(root: &Path) -> Result<Tables, ProviderError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ProviderError::Io { path, source }
    };
    let mut t = Tables::default();
    for case in fs::read_dir(root).map_err(io(root))? {
        let case = case.map_err(io(root))?.path();
        if !case.is_dir() {
            continue;
        }
        let case_id = case.file_name().unwrap().to_string_lossy().into_owned();
        for entry in fs::read_dir(&case).map_err(io(&case))? {
            let path = entry.map_err(io(&case))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
            let text = fs::read_to_string(&path).map_err(io(&path))?;
            if stem == "any" {
                t.fallback.insert(case_id.clone(), text);
            } else if let Some((idx, round)) = parse_stem(&stem) {
                if round == 0 {
                    t.table.insert((case_id.clone(), idx), text);
                } else {
                    t.rounds.insert((case_id.clone(), idx, round), text);
                }
            } else {
                log::warn!("ignoring scripted response {}", path.display());
            }
        }
    }
    Ok(t)
}

impl Provider for ScriptedProvider {
    fn config(&self) -> &ProviderConfig {
        &self.cfg
    }

    fn respond(&self, req: &GenerationRequest<'_>, _digest: &str) -> Result<String, ProviderError> {
        let case = req.case_id.to_string();
        self.rounds
            .get(&(case.clone(), req.sample_index, req.round))
            .or_else(|| self.table.get(&(case, req.sample_index)))
            .or_else(|| self.fallback.get(req.case_id))
            .cloned()
            .ok_or_else(|| ProviderError::ScriptMiss { case: req.case_id.to_string(), index: req.sample_index })
    }
}
