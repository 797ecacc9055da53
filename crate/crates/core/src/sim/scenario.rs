//! The split-input scenario: two honest groups with different inputs, and a
//! Byzantine group that holds the second input and starves the first group.

use crate::msg::Decision;

use super::{AdversaryKind, InputSpec, ProtocolKind, SimConfig, SimError};

/// Default partition `[n - 2t, t, t]`.
pub fn default_partition(n: usize, t: usize) -> [usize; 3] {
    [n.saturating_sub(2 * t), t, t]
}

/// Builds the scenario for group sizes `[a1, a2, f]`: nodes `0..a1` hold one
/// value, the next `a2` nodes hold another, and the last `f` nodes are
/// Byzantine, hold the second value and never message the first group.
pub fn scenario_split_input(n: usize, t: usize, sizes: Option<[usize; 3]>) -> Result<SimConfig, SimError> {
    let [a1, a2, f] = sizes.unwrap_or_else(|| default_partition(n, t));
    if a1 + a2 + f != n {
        return Err(SimError::InvalidPartition(format!("{a1} + {a2} + {f} != n = {n}")));
    }
    if f > t {
        return Err(SimError::InvalidPartition(format!("|F| = {f} exceeds t = {t}")));
    }
    if a1 == 0 || a2 + f == 0 {
        return Err(SimError::InvalidPartition("both input groups must be non-empty".into()));
    }
    let mut cfg = SimConfig::new(ProtocolKind::Acool, n, t);
    let (wa, wb) = cfg.value_pair();
    let values = (0..n).map(|i| Decision::Value(if i < a1 { wa.clone() } else { wb.clone() })).collect();
    cfg.inputs = InputSpec::Explicit { values };
    cfg.adversary = AdversaryKind::WithholdFromSubset;
    cfg.byzantine = Some((a1 + a2..n).collect());
    cfg.victims = Some((0..a1).collect());
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions() {
        assert_eq!(default_partition(4, 1), [2, 1, 1]);
        assert_eq!(default_partition(7, 2), [3, 2, 2]);
        let c = scenario_split_input(7, 2, None).unwrap();
        assert_eq!(c.byzantine, Some(vec![5, 6]));
        assert_eq!(c.victims, Some(vec![0, 1, 2]));
    }

    #[test]
    fn bad_partitions_rejected() {
        assert!(scenario_split_input(4, 1, Some([2, 1, 0])).is_err());
        assert!(scenario_split_input(7, 2, Some([2, 2, 3])).is_err());
    }
}
