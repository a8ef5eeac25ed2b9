use super::atoms::PresentLeaf;
use super::space::{AtomRef, AtomSpace, Goodness, Rooted};
use crate::model::{Moment, TreeModel};

pub struct Limits {
    pub depth: usize,
    pub branching: usize,
    pub moments: usize,
}

struct Builder<'a> {
    space: &'a AtomSpace,
    good: &'a Goodness,
    limits: &'a Limits,
    moments: Vec<Moment>,
    parent: Vec<Option<usize>>,
    actual: Vec<Vec<usize>>,
}

impl<'a> Builder<'a> {
    fn node(&mut self, atom: AtomRef, parent: Option<usize>) -> Result<usize, String> {
        let idx = self.moments.len();
        if idx >= self.limits.moments {
            return Err(format!("witness needs more than {} moments", self.limits.moments));
        }
        let mut m = Moment::new(format!("m{idx}"), self.space.agents());
        for (i, &(_, leaf)) in self.space.cl.present.iter().enumerate() {
            if atom.1 >> i & 1 == 0 {
                continue;
            }
            match leaf {
                PresentLeaf::Var(k) => {
                    m.vars.insert(k);
                }
                PresentLeaf::Act { agent, action } => m.performed[agent] |= 1 << action,
                PresentLeaf::Exp(a) => m.expected[a] = true,
                _ => {}
            }
        }
        self.moments.push(m);
        self.parent.push(parent);
        self.actual.push(Vec::new());
        Ok(idx)
    }

    fn rank_of_profile(&self, key: u32, prof: u32) -> u32 {
        self.good.profile_rank[key as usize][prof as usize].unwrap_or(u32::MAX)
    }

    /// A small admissible successor set inside the closed set `pool`.
    fn minimal_set(&self, sig: u32, pool: &[u32], required: Option<u32>) -> Result<Vec<u32>, String> {
        let s = self.space.sigs[sig as usize];
        let profs = &self.space.keys[s.child_key as usize].profiles;
        let mut set: Vec<u32> = required.into_iter().collect();
        let nec_count = self.space.cl.nec.len();
        let open = |set: &[u32]| -> Vec<usize> {
            (0..nec_count)
                .filter(|&k| s.nec >> k & 1 == 0 && !set.iter().any(|&p| profs[p as usize].x >> k & 1 == 0))
                .collect()
        };
        loop {
            let need = open(&set);
            if need.is_empty() {
                break;
            }
            let best = pool
                .iter()
                .copied()
                .filter(|p| !set.contains(p))
                .max_by_key(|&p| {
                    let covered = need.iter().filter(|&&k| profs[p as usize].x >> k & 1 == 0).count();
                    (covered, std::cmp::Reverse(self.rank_of_profile(s.child_key, p)), std::cmp::Reverse(p))
                })
                .ok_or("successor pool exhausted")?;
            if !need.iter().any(|&k| profs[best as usize].x >> k & 1 == 0) {
                return Err("successor pool cannot meet a demand".into());
            }
            set.push(best);
        }
        if s.act != self.space.act_all() && !set.iter().any(|&p| profs[p as usize].a == s.act) {
            let p = pool.iter().copied().find(|&p| profs[p as usize].a == s.act).ok_or("no actual successor in pool")?;
            set.push(p);
        }
        let agents = self.space.agents();
        loop {
            let mut changed = false;
            if agents >= 2 {
                let realized: Vec<u64> = set.iter().map(|&p| profs[p as usize].vec).collect();
                let proj: Vec<Vec<u64>> = (0..agents)
                    .map(|a| {
                        let mut v: Vec<u64> = set.iter().map(|&p| self.space.agent_vector(&profs[p as usize], a)).collect();
                        v.sort_unstable();
                        v.dedup();
                        v
                    })
                    .collect();
                let mut combos: Vec<Vec<u64>> = vec![vec![]];
                for options in &proj {
                    combos = combos
                        .into_iter()
                        .flat_map(|c| options.iter().map(move |&o| [c.clone(), vec![o]].concat()))
                        .collect();
                }
                for c in combos {
                    let packed = c.iter().enumerate().fold(0u64, |acc, (a, v)| acc | v << (a * self.space.cl.sig.action_count()));
                    if !realized.contains(&packed) && !set.iter().any(|&p| profs[p as usize].vec == packed) {
                        let p = pool.iter().copied().find(|&p| profs[p as usize].vec == packed).ok_or("pool is not closed under independence")?;
                        set.push(p);
                        changed = true;
                    }
                }
            }
            for a in 0..agents {
                let some = set.iter().any(|&p| profs[p as usize].exp >> a & 1 == 1);
                let off = set.iter().any(|&p| profs[p as usize].exp >> a & 1 == 0);
                if some && !off {
                    let vecs: Vec<u64> = set.iter().map(|&p| profs[p as usize].vec).collect();
                    let p = pool
                        .iter()
                        .copied()
                        .filter(|&p| profs[p as usize].exp >> a & 1 == 0)
                        .min_by_key(|&p| !vecs.contains(&profs[p as usize].vec))
                        .ok_or("pool is not closed under expectation defeasibility")?;
                    set.push(p);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if set.len() > self.limits.branching {
            return Err(format!("a moment needs {} successors (bound {})", set.len(), self.limits.branching));
        }
        Ok(set)
    }

    fn children(&mut self, node: usize, atom: AtomRef, set: &[u32], fixed: Option<(u32, AtomRef)>, below: Option<u32>) -> Result<Vec<(usize, AtomRef)>, String> {
        let sig = self.space.sig_of(atom);
        let s = self.space.sigs[sig as usize];
        let kd = &self.space.keys[s.child_key as usize];
        let mut out = Vec::new();
        let mut actual_done = s.act == self.space.act_all();
        for &prof in set {
            let child = match fixed {
                Some((fp, a)) if fp == prof => a,
                _ => {
                    let p = kd.profile_atoms[prof as usize]
                        .iter()
                        .copied()
                        .filter_map(|p| self.good.atom_rank(self.space, (s.child_key, p)).map(|r| (r, p)))
                        .filter(|&(r, _)| below.map_or(true, |b| r < b))
                        .min()
                        .ok_or("no good atom for a chosen profile")?
                        .1;
                    (s.child_key, p)
                }
            };
            let idx = self.node(child, Some(node))?;
            if !actual_done && kd.profiles[prof as usize].a == s.act {
                self.actual[node].push(idx);
                actual_done = true;
            }
            out.push((idx, child));
        }
        Ok(out)
    }

    fn grow(&mut self, node: usize, atom: AtomRef) -> Result<(), String> {
        let r = self.good.atom_rank(self.space, atom).ok_or("atom without rank")?;
        let sig = self.space.sig_of(atom);
        let pr = &self.good.profile_rank[self.space.sigs[sig as usize].child_key as usize];
        let sets = self.space.passing(sig, &|p| pr[p as usize].is_some_and(|x| x < r))?;
        let set = self.minimal_set(sig, &sets[0], None)?;
        for (idx, child) in self.children(node, atom, &set, None, Some(r))? {
            self.grow(idx, child)?;
        }
        Ok(())
    }
}

/// Unravels a finite tree model around `target`. `Err` carries the bound
/// that was exceeded.
pub fn extract(space: &AtomSpace, good: &Goodness, rooted: &Rooted, target: AtomRef, limits: &Limits) -> Result<(TreeModel, usize), String> {
    let mut chain = vec![target];
    while let Some(Some(p)) = rooted.parent.get(chain.last().unwrap()) {
        chain.push(*p);
    }
    chain.reverse();
    if chain.len() - 1 > limits.depth {
        return Err(format!("witness needs past depth {} (bound {})", chain.len() - 1, limits.depth));
    }
    let mut b = Builder { space, good, limits, moments: Vec::new(), parent: Vec::new(), actual: Vec::new() };
    let mut node = b.node(chain[0], None)?;
    for w in chain.windows(2) {
        let (atom, next) = (w[0], w[1]);
        let sig = space.sig_of(atom);
        let req = space.profile(next);
        let pr = &good.profile_rank[space.sigs[sig as usize].child_key as usize];
        let sets = space.passing(sig, &|p| pr[p as usize].is_some())?;
        let pool = sets.iter().find(|s| s.contains(&req)).ok_or("chain successor not admitted")?;
        let set = b.minimal_set(sig, pool, Some(req))?;
        let mut next_node = None;
        for (idx, child) in b.children(node, atom, &set, Some((req, next)), None)? {
            if child == next && next_node.is_none() {
                next_node = Some(idx);
            } else {
                b.grow(idx, child)?;
            }
        }
        node = next_node.ok_or("chain successor missing")?;
    }
    b.grow(node, target)?;
    let model = TreeModel::from_parts(space.cl.sig.clone(), b.moments, b.parent, b.actual).map_err(|e| e.to_string())?;
    Ok((model, node))
}
