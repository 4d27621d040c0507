use std::path::{Path, PathBuf};

use stackdram::technode::NodeScaling;
use stackdram::{apply_scaling, load_node, load_scaling, Error, Result, TechnologyNode};

pub const DEFAULT_NODE: &str = "nodes/2ynm.json";
pub const DEFAULT_SCALING: &str = "nodes/1znm-scaling.json";

fn is_scaling_file(path: &Path) -> bool {
    std::fs::read_to_string(path)
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .is_some_and(|v| v.get("confidence").is_some())
}

/// Builds the evaluation node.
///
/// `node` may name an unscaled node or, as a shorthand, a scaling file that
/// is then applied to the default unscaled node. Scaling a node that is
/// already at the target feature size leaves its dimensions unchanged.
pub fn resolve_node(
    data_dir: &Path,
    node: Option<&Path>,
    scaling: Option<&Path>,
    unscaled_only: bool,
) -> Result<TechnologyNode> {
    let mut node_path = node.map(Path::to_path_buf).unwrap_or_else(|| data_dir.join(DEFAULT_NODE));
    let mut scaling_path: Option<PathBuf> = scaling.map(Path::to_path_buf);
    if node.is_some() && is_scaling_file(&node_path) {
        if scaling.is_some() {
            return Err(Error::InvalidArgument(format!(
                "{} is a scaling file; pass it either as --node or as --node-scaling",
                node_path.display()
            )));
        }
        scaling_path = Some(node_path);
        node_path = data_dir.join(DEFAULT_NODE);
    }
    let unscaled = load_node(&node_path)?;
    if unscaled_only {
        return Ok(unscaled);
    }
    let scaling: NodeScaling = load_scaling(scaling_path.unwrap_or_else(|| data_dir.join(DEFAULT_SCALING)))?;
    apply_scaling(&unscaled, &scaling)
}
