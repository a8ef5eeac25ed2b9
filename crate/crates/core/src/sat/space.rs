use std::collections::{HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{rngs::StdRng, SeedableRng};

use super::atoms::{ClosureIndex, PresentLeaf};
use super::SatError;
use crate::formula::Formula;

/// What a child contributes to its parent's successor set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Profile {
    /// Performed actions, `actions` bits per agent.
    pub vec: u64,
    pub exp: u64,
    /// Truth of `x` for each `□x` leaf.
    pub x: u64,
    /// Truth of `x` for each `[A]x` leaf.
    pub a: u64,
}

/// Everything an atom's future depends on: the past part its children get,
/// and its own `□` and `[A]` leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FutureSig {
    pub child_key: u32,
    pub nec: u64,
    pub act: u64,
}

pub struct KeyData {
    pub key: u128,
    /// Indexed by the present bits.
    pub atom_sig: Vec<u32>,
    pub atom_profile: Vec<u32>,
    pub atom_goal: Vec<bool>,
    pub profiles: Vec<Profile>,
    pub profile_atoms: Vec<Vec<u32>>,
}

/// An atom is a past part (key) together with present bits.
pub type AtomRef = (u32, u32);

/// Atoms reachable from root past parts, grouped by past part.
pub struct AtomSpace {
    pub cl: ClosureIndex,
    pub keys: Vec<KeyData>,
    pub sigs: Vec<FutureSig>,
    goal: usize,
    nec_all: u64,
    act_all: u64,
    agents: usize,
    actions: usize,
}

pub struct Goodness {
    pub sig_rank: Vec<Option<u32>>,
    pub profile_rank: Vec<Vec<Option<u32>>>,
    pub failures: HashMap<u32, String>,
}

impl Goodness {
    pub fn atom_rank(&self, space: &AtomSpace, (k, p): AtomRef) -> Option<u32> {
        self.sig_rank[space.keys[k as usize].atom_sig[p as usize] as usize]
    }
}

pub struct Rooted {
    /// Realizable atoms in discovery order with the parent used to reach them.
    pub order: Vec<(AtomRef, Option<AtomRef>)>,
    pub parent: HashMap<AtomRef, Option<AtomRef>>,
}

fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl AtomSpace {
    pub fn build(cl: ClosureIndex, goal: &Formula, max_atoms: usize, max_present: usize) -> Result<Self, SatError> {
        let np = cl.present.len();
        if np > max_present {
            return Err(SatError::TooLarge(format!("{np} present leaves (cap {max_present})")));
        }
        let goal = cl.node(goal).expect("goal is a closure member");
        let agents = cl.sig.agent_count();
        let actions = cl.sig.action_count();
        let mut space = AtomSpace {
            nec_all: low_bits(cl.nec.len()),
            act_all: low_bits(cl.actual.len()),
            cl,
            keys: Vec::new(),
            sigs: Vec::new(),
            goal,
            agents,
            actions,
        };
        let mut key_index: HashMap<u128, u32> = HashMap::new();
        let mut sig_index: HashMap<FutureSig, u32> = HashMap::new();
        let root = space.cl.root_key();
        key_index.insert(root, 0);
        let mut queue = VecDeque::from([root]);
        let mut truth = Vec::new();
        let per_key = 1usize << np;
        while let Some(key) = queue.pop_front() {
            if (space.keys.len() + 1) * per_key > max_atoms {
                return Err(SatError::TooLarge(format!("more than {max_atoms} atoms")));
            }
            let mut kd = KeyData {
                key,
                atom_sig: Vec::with_capacity(per_key),
                atom_profile: Vec::with_capacity(per_key),
                atom_goal: Vec::with_capacity(per_key),
                profiles: Vec::new(),
                profile_atoms: Vec::new(),
            };
            let mut prof_index: HashMap<Profile, u32> = HashMap::new();
            for pres in 0..per_key as u64 {
                space.cl.eval_into(pres, key, &mut truth);
                let ck = space.cl.child_key(&truth);
                let next = key_index.len() as u32;
                let child_key = *key_index.entry(ck).or_insert_with(|| {
                    queue.push_back(ck);
                    next
                });
                let mut prof = Profile { vec: 0, exp: 0, x: 0, a: 0 };
                let mut fs = FutureSig { child_key, nec: 0, act: 0 };
                let (mut ni, mut ai) = (0, 0);
                for (i, &(_, leaf)) in space.cl.present.iter().enumerate() {
                    let bit = pres >> i & 1 == 1;
                    match leaf {
                        PresentLeaf::Act { agent, action } if bit => prof.vec |= 1 << (agent * actions + action),
                        PresentLeaf::Exp(a) if bit => prof.exp |= 1 << a,
                        PresentLeaf::Nec(x) => {
                            if bit {
                                fs.nec |= 1 << ni;
                            }
                            if truth[x] {
                                prof.x |= 1 << ni;
                            }
                            ni += 1;
                        }
                        PresentLeaf::Actual(x) => {
                            if bit {
                                fs.act |= 1 << ai;
                            }
                            if truth[x] {
                                prof.a |= 1 << ai;
                            }
                            ai += 1;
                        }
                        _ => {}
                    }
                }
                let nsig = sig_index.len() as u32;
                let sid = *sig_index.entry(fs).or_insert(nsig);
                if sid == nsig {
                    space.sigs.push(fs);
                }
                let np_ = prof_index.len() as u32;
                let pid = *prof_index.entry(prof).or_insert(np_);
                if pid == np_ {
                    kd.profiles.push(prof);
                    kd.profile_atoms.push(Vec::new());
                }
                kd.profile_atoms[pid as usize].push(pres as u32);
                kd.atom_sig.push(sid);
                kd.atom_profile.push(pid);
                kd.atom_goal.push(truth[space.goal]);
            }
            space.keys.push(kd);
        }
        Ok(space)
    }

    pub fn atom_count(&self) -> usize {
        self.keys.iter().map(|k| k.atom_sig.len()).sum()
    }

    pub fn truth(&self, (k, p): AtomRef) -> Vec<bool> {
        let mut t = Vec::new();
        self.cl.eval_into(p as u64, self.keys[k as usize].key, &mut t);
        t
    }

    pub fn profile(&self, (k, p): AtomRef) -> u32 {
        self.keys[k as usize].atom_profile[p as usize]
    }

    pub fn sig_of(&self, (k, p): AtomRef) -> u32 {
        self.keys[k as usize].atom_sig[p as usize]
    }

    fn agent_vec(&self, prof: &Profile, agent: usize) -> u64 {
        prof.vec >> (agent * self.actions) & low_bits(self.actions)
    }

    fn describe_nec(&self, k: usize) -> String {
        let (node, _) = self.cl.present[self.cl.nec[k]];
        let f = &self.cl.nodes[node];
        match f {
            Formula::Nec(x) => Formula::poss(x.neg()).to_string(),
            _ => f.to_string(),
        }
    }

    /// Candidate children of `sig`: profiles at its child key admitted by
    /// `allowed` whose `x` bits satisfy every true `□x`.
    pub fn candidates(&self, sig: u32, allowed: &dyn Fn(u32) -> bool) -> Vec<u32> {
        let s = self.sigs[sig as usize];
        let kd = &self.keys[s.child_key as usize];
        (0..kd.profiles.len() as u32).filter(|&p| allowed(p) && kd.profiles[p as usize].x & s.nec == s.nec).collect()
    }

    /// First unmet demand of `sig` by the profile set, if any.
    pub fn unmet(&self, sig: u32, set: &[u32]) -> Option<String> {
        let s = self.sigs[sig as usize];
        let kd = &self.keys[s.child_key as usize];
        let open = !s.nec & self.nec_all;
        for k in 0..self.cl.nec.len() {
            if open >> k & 1 == 1 && !set.iter().any(|&p| kd.profiles[p as usize].x >> k & 1 == 0) {
                return Some(format!("no successor for {}", self.describe_nec(k)));
            }
        }
        if s.act != self.act_all && !set.iter().any(|&p| kd.profiles[p as usize].a == s.act) {
            return Some("no actual successor matching the [A] members".into());
        }
        None
    }

    /// Maximal subsets of the candidates closed under independence and
    /// expectation defeasibility. Every admissible successor set lies inside
    /// one of them.
    pub fn closed_sets(&self, sig: u32, cands: Vec<u32>) -> Vec<Vec<u32>> {
        let key = self.sigs[sig as usize].child_key as usize;
        let profs = &self.keys[key].profiles;
        let mut out = Vec::new();
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        let mut stack = vec![cands];
        while let Some(mut s) = stack.pop() {
            loop {
                let before = s.len();
                for a in 0..self.agents {
                    let some = s.iter().any(|&p| profs[p as usize].exp >> a & 1 == 1);
                    let none_off = !s.iter().any(|&p| profs[p as usize].exp >> a & 1 == 0);
                    if some && none_off {
                        s.retain(|&p| profs[p as usize].exp >> a & 1 == 0);
                    }
                }
                if s.len() == before {
                    break;
                }
            }
            match self.missing_combo(profs, &s) {
                Some(combo) => {
                    for (a, v) in combo.iter().enumerate() {
                        let t: Vec<u32> = s.iter().copied().filter(|&p| self.agent_vec(&profs[p as usize], a) != *v).collect();
                        if seen.insert(t.clone()) {
                            stack.push(t);
                        }
                    }
                }
                None => out.push(s),
            }
        }
        out
    }

    fn missing_combo(&self, profs: &[Profile], s: &[u32]) -> Option<Vec<u64>> {
        if self.agents < 2 || s.is_empty() {
            return None;
        }
        let realized: HashSet<u64> = s.iter().map(|&p| profs[p as usize].vec).collect();
        let mut proj: Vec<Vec<u64>> = vec![Vec::new(); self.agents];
        for &p in s {
            for (a, pa) in proj.iter_mut().enumerate() {
                let v = self.agent_vec(&profs[p as usize], a);
                if !pa.contains(&v) {
                    pa.push(v);
                }
            }
        }
        let mut idx = vec![0usize; self.agents];
        loop {
            let packed = (0..self.agents).fold(0u64, |acc, a| acc | proj[a][idx[a]] << (a * self.actions));
            if !realized.contains(&packed) {
                return Some((0..self.agents).map(|a| proj[a][idx[a]]).collect());
            }
            let mut a = 0;
            loop {
                if a == self.agents {
                    return None;
                }
                idx[a] += 1;
                if idx[a] < proj[a].len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
        }
    }

    /// Closed sets meeting every demand, or the reason none does.
    pub fn passing(&self, sig: u32, allowed: &dyn Fn(u32) -> bool) -> Result<Vec<Vec<u32>>, String> {
        let cands = self.candidates(sig, allowed);
        let mut reason = None;
        let mut out = Vec::new();
        for s in self.closed_sets(sig, cands) {
            match self.unmet(sig, &s) {
                None => out.push(s),
                Some(r) => {
                    reason.get_or_insert(r);
                }
            }
        }
        if out.is_empty() {
            Err(reason.unwrap_or_else(|| "no closed successor set".into()))
        } else {
            Ok(out)
        }
    }

    fn profile_ranks(&self, sig_rank: &[Option<u32>]) -> Vec<Vec<Option<u32>>> {
        self.keys
            .iter()
            .map(|kd| {
                let mut pr = vec![None; kd.profiles.len()];
                for (p, &s) in kd.atom_sig.iter().enumerate() {
                    if let Some(r) = sig_rank[s as usize] {
                        let slot: &mut Option<u32> = &mut pr[kd.atom_profile[p] as usize];
                        *slot = Some(slot.map_or(r, |o: u32| o.min(r)));
                    }
                }
                pr
            })
            .collect()
    }

    /// Least fixpoint: rank `r` signatures have an admissible successor set
    /// among children of rank below `r`.
    pub fn good(&self) -> Goodness {
        let mut sig_rank: Vec<Option<u32>> = vec![None; self.sigs.len()];
        let mut profile_rank = self.profile_ranks(&sig_rank);
        let mut failures = HashMap::new();
        for round in 0.. {
            let mut newly = Vec::new();
            failures.clear();
            for s in 0..self.sigs.len() as u32 {
                if sig_rank[s as usize].is_some() {
                    continue;
                }
                let pr = &profile_rank[self.sigs[s as usize].child_key as usize];
                match self.passing(s, &|p| pr[p as usize].is_some()) {
                    Ok(_) => newly.push(s),
                    Err(r) => {
                        failures.insert(s, r);
                    }
                }
            }
            if newly.is_empty() {
                break;
            }
            for s in newly {
                sig_rank[s as usize] = Some(round);
            }
            profile_rank = self.profile_ranks(&sig_rank);
        }
        Goodness { sig_rank, profile_rank, failures }
    }

    /// The same fixpoint computed one signature at a time in a shuffled
    /// order; only membership is returned.
    pub fn good_in_order(&self, seed: u64) -> Vec<bool> {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut good = vec![false; self.sigs.len()];
        let mut order: Vec<u32> = (0..self.sigs.len() as u32).collect();
        loop {
            order.shuffle(&mut rng);
            let mut changed = false;
            for &s in &order {
                if good[s as usize] {
                    continue;
                }
                let kd = &self.keys[self.sigs[s as usize].child_key as usize];
                let ok_profile: Vec<bool> = (0..kd.profiles.len())
                    .map(|p| kd.profile_atoms[p].iter().any(|&a| good[kd.atom_sig[a as usize] as usize]))
                    .collect();
                if self.passing(s, &|p| ok_profile[p as usize]).is_ok() {
                    good[s as usize] = true;
                    changed = true;
                }
            }
            if !changed {
                return good;
            }
        }
    }

    /// Atoms reachable from good root atoms through admissible successor
    /// sets of good atoms.
    pub fn rooted(&self, g: &Goodness) -> Rooted {
        let mut order = Vec::new();
        let mut parent: HashMap<AtomRef, Option<AtomRef>> = HashMap::new();
        let mut witness: HashMap<u32, AtomRef> = HashMap::new();
        let mut queue = VecDeque::new();
        let root = &self.keys[0];
        for p in 0..root.atom_sig.len() as u32 {
            let s = root.atom_sig[p as usize];
            if g.sig_rank[s as usize].is_some() {
                parent.insert((0, p), None);
                order.push(((0, p), None));
                if let std::collections::hash_map::Entry::Vacant(e) = witness.entry(s) {
                    e.insert((0, p));
                    queue.push_back(s);
                }
            }
        }
        while let Some(s) = queue.pop_front() {
            let from = witness[&s];
            let ck = self.sigs[s as usize].child_key;
            let pr = &g.profile_rank[ck as usize];
            let Ok(sets) = self.passing(s, &|p| pr[p as usize].is_some()) else { continue };
            let mut admitted: Vec<u32> = sets.into_iter().flatten().collect();
            admitted.sort_unstable();
            admitted.dedup();
            let kd = &self.keys[ck as usize];
            for prof in admitted {
                for &p in &kd.profile_atoms[prof as usize] {
                    let cs = kd.atom_sig[p as usize];
                    if g.sig_rank[cs as usize].is_none() || parent.contains_key(&(ck, p)) {
                        continue;
                    }
                    parent.insert((ck, p), Some(from));
                    order.push(((ck, p), Some(from)));
                    if let std::collections::hash_map::Entry::Vacant(e) = witness.entry(cs) {
                        e.insert((ck, p));
                        queue.push_back(cs);
                    }
                }
            }
        }
        Rooted { order, parent }
    }

    pub fn goal_at(&self, (k, p): AtomRef) -> bool {
        self.keys[k as usize].atom_goal[p as usize]
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn agent_vector(&self, prof: &Profile, agent: usize) -> u64 {
        self.agent_vec(prof, agent)
    }

    pub fn act_all(&self) -> u64 {
        self.act_all
    }
}
