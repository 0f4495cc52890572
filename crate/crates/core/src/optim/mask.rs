use crate::error::{Error, Result};
use crate::model::MlpSpec;

/// Which MLP layers receive the corrected update. Layers count from the
/// input side, starting at 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LayerSelector {
    All,
    None,
    /// The `k` layers closest to the input.
    Bottom(usize),
    /// The `k` layers closest to the output.
    Top(usize),
    Layers(Vec<usize>),
}

impl std::str::FromStr for LayerSelector {
    type Err = Error;

    /// `all`, `none`, `bottom:K`, `top:K` or `layers:I+J+...` (no commas, so the selector is CSV-safe).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::config(format!("bad layer selector '{s}'"));
        let count = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
        match s.split_once(':') {
            None if s == "all" => Ok(LayerSelector::All),
            None if s == "none" => Ok(LayerSelector::None),
            Some(("bottom", k)) => Ok(LayerSelector::Bottom(count(k)?)),
            Some(("top", k)) => Ok(LayerSelector::Top(count(k)?)),
            Some(("layers", list)) => Ok(LayerSelector::Layers(
                list.split('+').map(count).collect::<Result<_>>()?,
            )),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for LayerSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LayerSelector::All => write!(f, "all"),
            LayerSelector::None => write!(f, "none"),
            LayerSelector::Bottom(k) => write!(f, "bottom:{k}"),
            LayerSelector::Top(k) => write!(f, "top:{k}"),
            LayerSelector::Layers(l) => {
                let s: Vec<String> = l.iter().map(|i| i.to_string()).collect();
                write!(f, "layers:{}", s.join("+"))
            }
        }
    }
}

/// Boolean mask over the flat parameters, true on every weight and bias of
/// the selected layers.
pub fn make_mask(spec: &MlpSpec, selector: &LayerSelector) -> Result<Vec<bool>> {
    let layers = spec.num_layers();
    let selected: Vec<usize> = match selector {
        LayerSelector::All => (0..layers).collect(),
        LayerSelector::None => vec![],
        LayerSelector::Bottom(k) | LayerSelector::Top(k) if *k > layers => {
            return Err(Error::config(format!(
                "selector {selector} exceeds {layers} layers"
            )));
        }
        LayerSelector::Bottom(k) => (0..*k).collect(),
        LayerSelector::Top(k) => (layers - k..layers).collect(),
        LayerSelector::Layers(list) => {
            if let Some(bad) = list.iter().find(|&&l| l >= layers) {
                return Err(Error::config(format!(
                    "layer {bad} out of range for {layers} layers"
                )));
            }
            list.clone()
        }
    };
    let mut mask = vec![false; spec.num_params()];
    let ranges = spec.layer_param_ranges();
    for l in selected {
        mask[ranges[l].clone()].iter_mut().for_each(|m| *m = true);
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> MlpSpec {
        MlpSpec::new(vec![1, 8, 8, 8, 1], 0.01).unwrap()
    }

    #[test]
    fn all_layers_gives_full_mask() {
        assert!(make_mask(&spec(), &LayerSelector::All)
            .unwrap()
            .iter()
            .all(|&m| m));
    }

    #[test]
    fn bottom_layer_covers_first_sixteen_entries() {
        let mask = make_mask(&spec(), &LayerSelector::Bottom(1)).unwrap();
        assert!(mask[..16].iter().all(|&m| m));
        assert!(mask[16..].iter().all(|&m| !m));
    }

    #[test]
    fn top_layer_covers_output_weights_and_bias() {
        let mask = make_mask(&spec(), &LayerSelector::Top(1)).unwrap();
        let n = mask.len();
        assert!(mask[n - 9..].iter().all(|&m| m));
        assert_eq!(mask.iter().filter(|&&m| m).count(), 9);
    }

    #[test]
    fn out_of_range_is_config_error() {
        assert!(make_mask(&spec(), &LayerSelector::Bottom(5)).is_err());
        assert!(make_mask(&spec(), &LayerSelector::Layers(vec![4])).is_err());
    }

    #[test]
    fn parses_and_prints() {
        for s in ["all", "none", "bottom:2", "top:1", "layers:0+2"] {
            assert_eq!(s.parse::<LayerSelector>().unwrap().to_string(), s);
        }
        assert!("bottom:x".parse::<LayerSelector>().is_err());
    }
}
