//! Independent checkers for the corpus programs. Everything here is written
//! directly against the problem statements (brute force where needed) and
//! shares no evaluation code with the interpreter.

// index-style loops mirror the constraint statements over course/period
// matrices more directly than iterator chains would
#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

/// Ten digits describe themselves when digit `i` counts the occurrences of
/// `i` in the number.
pub fn self_describing(digits: &[i64]) -> bool {
    if digits.len() != 10 || digits.iter().any(|&d| !(0..=9).contains(&d)) {
        return false;
    }
    (0..10).all(|i| digits[i] == digits.iter().filter(|&&d| d == i as i64).count() as i64)
}

/// Exhaustively enumerate all digit vectors with digit-sum 10 and collect
/// the self-describing ones.
pub fn self_describing_solutions() -> Vec<Vec<i64>> {
    let mut found = Vec::new();
    let mut digits = [0i64; 10];
    fn rec(digits: &mut [i64; 10], pos: usize, left: i64, found: &mut Vec<Vec<i64>>) {
        if pos == 10 {
            if left == 0 && self_describing(digits) {
                found.push(digits.to_vec());
            }
            return;
        }
        for d in 0..=left.min(9) {
            digits[pos] = d;
            rec(digits, pos + 1, left - d, found);
        }
        digits[pos] = 0;
    }
    rec(&mut digits, 0, 10, &mut found);
    found
}

/// `board[r][c]` holds the move number of the knight's visit to (r, c),
/// 1-based rows is irrelevant here: the board is given row-major. Valid when
/// the marks are a bijection onto 1..n*n, mark 1 sits at (1,1), and each
/// consecutive pair of marks is one knight move apart.
pub fn knight_tour_valid(board: &[Vec<i64>]) -> bool {
    let n = board.len();
    if n == 0 || board.iter().any(|row| row.len() != n) {
        return false;
    }
    let cells = (n * n) as i64;
    let mut pos = vec![None; cells as usize + 1];
    for (r, row) in board.iter().enumerate() {
        for (c, &mark) in row.iter().enumerate() {
            if mark < 1 || mark > cells {
                return false;
            }
            if pos[mark as usize].replace((r as i64, c as i64)).is_some() {
                return false;
            }
        }
    }
    if pos[1] != Some((0, 0)) {
        return false;
    }
    for k in 1..cells {
        let (r1, c1) = pos[k as usize].unwrap();
        let (r2, c2) = pos[k as usize + 1].unwrap();
        let (dr, dc) = ((r2 - r1).abs(), (c2 - c1).abs());
        if !((dr == 1 && dc == 2) || (dr == 2 && dc == 1)) {
            return false;
        }
    }
    true
}

/// Number of open knight's tours of an n by n board starting in the corner,
/// counted by depth-first search.
pub fn count_knight_tours(n: usize) -> u64 {
    const MOVES: [(i64, i64); 8] = [
        (2, 1), (1, 2), (-1, 2), (-2, 1), (-2, -1), (-1, -2), (1, -2), (2, -1),
    ];
    fn rec(n: i64, visited: &mut [bool], r: i64, c: i64, left: usize) -> u64 {
        if left == 0 {
            return 1;
        }
        let mut total = 0;
        for (dr, dc) in MOVES {
            let (nr, nc) = (r + dr, c + dc);
            if nr < 0 || nr >= n || nc < 0 || nc >= n {
                continue;
            }
            let idx = (nr * n + nc) as usize;
            if visited[idx] {
                continue;
            }
            visited[idx] = true;
            total += rec(n, visited, nr, nc, left - 1);
            visited[idx] = false;
        }
        total
    }
    let mut visited = vec![false; n * n];
    visited[0] = true;
    rec(n as i64, &mut visited, 0, 0, n * n - 1)
}

/// Length in arcs of the longest simple path from `v1` to `v2` (0-based) in
/// the digraph `adj`, or `None` when no path exists. Exhaustive search; fine
/// for the small graphs it is used on.
pub fn longest_path(adj: &[Vec<bool>], v1: usize, v2: usize) -> Option<usize> {
    fn rec(
        adj: &[Vec<bool>],
        visited: &mut [bool],
        at: usize,
        target: usize,
        len: usize,
        best: &mut Option<usize>,
    ) {
        if at == target {
            if best.is_none_or(|b| len > b) {
                *best = Some(len);
            }
            return;
        }
        visited[at] = true;
        for (next, &arc) in adj[at].iter().enumerate() {
            if arc && !visited[next] {
                rec(adj, visited, next, target, len + 1, best);
            }
        }
        visited[at] = false;
    }
    if v1 == v2 {
        return Some(0);
    }
    let mut best = None;
    let mut visited = vec![false; adj.len()];
    rec(adj, &mut visited, v1, v2, 0, &mut best);
    best
}

/// Check a path-marking array as produced by the LongestPath corpus program:
/// marks 1..k label the nodes of a simple path from `v1` (mark 1) whose next
/// arc after mark k reaches `v2`, all other nodes marked 0.
pub fn path_marks_valid(adj: &[Vec<bool>], v1: usize, v2: usize, marks: &[i64]) -> Option<usize> {
    let n = adj.len();
    if marks.len() != n {
        return None;
    }
    let k = *marks.iter().max()? as usize;
    if k == 0 {
        return None;
    }
    let mut by_mark = vec![None; k + 1];
    for (node, &m) in marks.iter().enumerate() {
        if m < 0 || m as usize > k {
            return None;
        }
        if m > 0 && by_mark[m as usize].replace(node).is_some() {
            return None;
        }
    }
    let order: Vec<usize> = (1..=k).map(|m| by_mark[m]).collect::<Option<_>>()?;
    if order[0] != v1 || marks[v2] != 0 {
        return None;
    }
    for w in order.windows(2) {
        if !adj[w[0]][w[1]] {
            return None;
        }
    }
    if !adj[order[k - 1]][v2] {
        return None;
    }
    Some(k)
}

/// Lexicographically next permutation, or `None` for the last one.
pub fn next_permutation(a: &[i64]) -> Option<Vec<i64>> {
    let mut p = a.to_vec();
    let n = p.len();
    if n < 2 {
        return None;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    Some(p)
}

/// Lexicographically previous permutation, or `None` for the first one.
pub fn prev_permutation(a: &[i64]) -> Option<Vec<i64>> {
    let mut p = a.to_vec();
    let n = p.len();
    if n < 2 {
        return None;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] <= p[i] {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let mut j = n - 1;
    while p[j] >= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    Some(p)
}

// ---------------------------------------------------------------------------
// timetabling
// ---------------------------------------------------------------------------

/// One timetabling instance: `available[c][p]`, symmetric `conflict[c][c]`,
/// per-course lecture counts, and the room count.
#[derive(Clone, Debug)]
pub struct Instance {
    pub available: Vec<Vec<bool>>,
    pub conflict: Vec<Vec<bool>>,
    pub requirements: Vec<i64>,
    pub rooms: i64,
}

impl Instance {
    pub fn courses(&self) -> usize {
        self.requirements.len()
    }

    pub fn periods(&self) -> usize {
        self.available.first().map_or(0, |row| row.len())
    }

    /// The same instance with the conflict between `c1` and `c2` (1-based)
    /// removed.
    pub fn relaxed(&self, c1: usize, c2: usize) -> Instance {
        let mut inst = self.clone();
        inst.conflict[c1 - 1][c2 - 1] = false;
        inst.conflict[c2 - 1][c1 - 1] = false;
        inst
    }
}

/// All four constraints of the problem statement: per-course lecture counts,
/// availability, no shared period for conflicting courses, and at most
/// `rooms` lectures per period.
pub fn timetable_valid(inst: &Instance, timetable: &[Vec<bool>]) -> bool {
    let q = inst.courses();
    let p = inst.periods();
    if timetable.len() != q || timetable.iter().any(|row| row.len() != p) {
        return false;
    }
    for c in 0..q {
        let scheduled = timetable[c].iter().filter(|&&b| b).count() as i64;
        if scheduled != inst.requirements[c] {
            return false;
        }
        for per in 0..p {
            if timetable[c][per] && !inst.available[c][per] {
                return false;
            }
        }
    }
    for c1 in 0..q {
        for c2 in c1 + 1..q {
            if inst.conflict[c1][c2] {
                for per in 0..p {
                    if timetable[c1][per] && timetable[c2][per] {
                        return false;
                    }
                }
            }
        }
    }
    for per in 0..p {
        let load = (0..q).filter(|&c| timetable[c][per]).count() as i64;
        if load > inst.rooms {
            return false;
        }
    }
    true
}

/// Independent backtracking search for any feasible timetable.
pub fn solve_timetable(inst: &Instance) -> Option<Vec<Vec<bool>>> {
    let mut count = 0;
    let mut witness = None;
    enumerate_timetables(inst, Some(1), &mut count, &mut witness);
    witness
}

/// Count all feasible timetables (each course's lectures are a set of
/// periods, so this matches the symmetry-broken search of the programs).
pub fn count_timetables(inst: &Instance) -> u64 {
    let mut count = 0;
    enumerate_timetables(inst, None, &mut count, &mut None);
    count
}

/// The number of solutions a full relaxed enumeration reports: all plain
/// solutions, plus, for every conflicting course pair, all solutions of the
/// instance with that single conflict dropped.
pub fn count_relaxed_enumeration(inst: &Instance) -> u64 {
    let mut total = count_timetables(inst);
    let q = inst.courses();
    for c1 in 1..=q {
        for c2 in c1 + 1..=q {
            if inst.conflict[c1 - 1][c2 - 1] {
                total += count_timetables(&inst.relaxed(c1, c2));
            }
        }
    }
    total
}

fn enumerate_timetables(
    inst: &Instance,
    stop_after: Option<u64>,
    count: &mut u64,
    witness: &mut Option<Vec<Vec<bool>>>,
) {
    let q = inst.courses();
    let p = inst.periods();
    let mut timetable = vec![vec![false; p]; q];
    let mut loads = vec![0i64; p];
    fn rec(
        inst: &Instance,
        timetable: &mut Vec<Vec<bool>>,
        loads: &mut Vec<i64>,
        course: usize,
        lecture: i64,
        min_period: usize,
        stop_after: Option<u64>,
        count: &mut u64,
        witness: &mut Option<Vec<Vec<bool>>>,
    ) -> bool {
        let q = inst.courses();
        let p = inst.periods();
        if course == q {
            *count += 1;
            if witness.is_none() {
                *witness = Some(timetable.clone());
            }
            return stop_after.is_some_and(|cap| *count >= cap);
        }
        if lecture >= inst.requirements[course] {
            return rec(
                inst, timetable, loads, course + 1, 0, 0, stop_after, count, witness,
            );
        }
        for per in min_period..p {
            if !inst.available[course][per] || loads[per] >= inst.rooms {
                continue;
            }
            if (0..course).any(|c1| inst.conflict[c1][course] && timetable[c1][per]) {
                continue;
            }
            timetable[course][per] = true;
            loads[per] += 1;
            let stop = rec(
                inst,
                timetable,
                loads,
                course,
                lecture + 1,
                per + 1,
                stop_after,
                count,
                witness,
            );
            timetable[course][per] = false;
            loads[per] -= 1;
            if stop {
                return true;
            }
        }
        false
    }
    rec(
        inst,
        &mut timetable,
        &mut loads,
        0,
        0,
        0,
        stop_after,
        count,
        witness,
    );
}
