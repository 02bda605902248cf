use std::collections::{HashMap, HashSet};

use crate::area::AreaRegistry;
use crate::bulletin::{render_body, Bulletin};

use super::GenerateError;

/// Merges bulletins whose bodies render identically. Areas in each group
/// follow broadcast order and groups are ordered by their first area.
pub fn consolidate(bulletins: &[Bulletin], registry: &AreaRegistry) -> Result<Vec<Bulletin>, GenerateError> {
    let mut seen = HashSet::new();
    let mut groups: Vec<(String, Bulletin)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for b in bulletins {
        for a in &b.areas {
            registry.get(a).ok_or_else(|| GenerateError::UnknownArea(a.clone()))?;
            if !seen.insert(a.to_lowercase()) {
                return Err(GenerateError::DuplicateArea(a.clone()));
            }
        }
        let body = render_body(b);
        match index.get(&body) {
            Some(&i) => groups[i].1.areas.extend(b.areas.iter().cloned()),
            None => {
                index.insert(body.clone(), groups.len());
                groups.push((body, b.clone()));
            }
        }
    }
    let order = |name: &String| registry.order_of(name).expect("checked above");
    let mut out: Vec<Bulletin> = groups
        .into_iter()
        .map(|(_, mut b)| {
            b.areas.sort_by_key(order);
            b
        })
        .filter(|b| !b.areas.is_empty())
        .collect();
    out.sort_by_key(|b| order(&b.areas[0]));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bulletin::{StateClause, WindClause};
    use crate::categorical::{Compass, SeaState, VisibilityClass};
    use proptest::prelude::*;

    fn bulletin(area: &str, force: u8) -> Bulletin {
        Bulletin {
            areas: vec![area.into()],
            wind: vec![WindClause::new(Compass::Westerly, force, force)],
            sea_state: vec![StateClause::new(SeaState::Slight)],
            weather: vec![],
            visibility: vec![StateClause::new(VisibilityClass::Good)],
            gale: None,
        }
    }

    /// Pairwise comparison of every bulletin against every other.
    fn oracle(bulletins: &[Bulletin], registry: &AreaRegistry) -> Vec<Vec<String>> {
        let mut groups: Vec<Vec<String>> = Vec::new();
        let mut used = vec![false; bulletins.len()];
        for i in 0..bulletins.len() {
            if used[i] {
                continue;
            }
            let mut g = vec![];
            for j in i..bulletins.len() {
                if !used[j] && render_body(&bulletins[i]) == render_body(&bulletins[j]) {
                    used[j] = true;
                    g.extend(bulletins[j].areas.clone());
                }
            }
            g.sort_by_key(|a| registry.order_of(a).unwrap());
            groups.push(g);
        }
        groups.sort_by_key(|g| registry.order_of(&g[0]).unwrap());
        groups
    }

    #[test]
    fn identical_bodies_merge() {
        let reg = AreaRegistry::builtin();
        let out = consolidate(&[bulletin("Wight", 4), bulletin("Dover", 4), bulletin("Thames", 5)], &reg).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].areas, vec!["Thames"]);
        assert_eq!(out[1].areas, vec!["Dover", "Wight"]);
    }

    #[test]
    fn distinct_bodies_pass_through() {
        let reg = AreaRegistry::builtin();
        let input = vec![bulletin("Dover", 3), bulletin("Wight", 4)];
        assert_eq!(consolidate(&input, &reg).unwrap(), input);
    }

    #[test]
    fn duplicate_area_is_an_error() {
        let reg = AreaRegistry::builtin();
        assert!(matches!(
            consolidate(&[bulletin("Dover", 3), bulletin("Dover", 4)], &reg),
            Err(GenerateError::DuplicateArea(_))
        ));
    }

    proptest! {
        #[test]
        fn matches_pairwise_oracle_and_is_idempotent(forces in proptest::collection::vec(2u8..6, 31)) {
            let reg = AreaRegistry::builtin();
            let input: Vec<Bulletin> = reg.iter().zip(&forces).map(|(a, &f)| bulletin(&a.name, f)).collect();
            let once = consolidate(&input, &reg).unwrap();
            let groups: Vec<Vec<String>> = once.iter().map(|b| b.areas.clone()).collect();
            prop_assert_eq!(groups, oracle(&input, &reg));
            prop_assert_eq!(consolidate(&once, &reg).unwrap(), once.clone());
            let mut areas: Vec<String> = once.iter().flat_map(|b| b.areas.clone()).collect();
            areas.sort();
            let mut expected: Vec<String> = reg.iter().map(|a| a.name.clone()).collect();
            expected.sort();
            prop_assert_eq!(areas, expected);
        }
    }
}
