//! Small graph helpers shared by the automata constructions.

use alloc::vec;
use alloc::vec::Vec;

/// Strongly connected components (Tarjan, iterative). Returns the component
/// index of every node and whether each component contains a cycle.
pub(crate) fn sccs(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> (Vec<usize>, Vec<bool>) {
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut cyclic = Vec::new();
    let mut stack = Vec::new();
    let mut next_index = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, succ(root), 0));
        while let Some(frame) = call.last_mut() {
            let v = frame.0;
            if frame.2 < frame.1.len() {
                let w = frame.1[frame.2];
                frame.2 += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, succ(w), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            let self_loop = frame.1.contains(&v);
            call.pop();
            if let Some(parent) = call.last() {
                low[parent.0] = low[parent.0].min(low[v]);
            }
            if low[v] == index[v] {
                let c = cyclic.len();
                let mut size = 0;
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp[w] = c;
                    size += 1;
                    if w == v {
                        break;
                    }
                }
                cyclic.push(size > 1 || self_loop);
            }
        }
    }
    (comp, cyclic)
}

/// Nodes from which some node in `targets` is reachable.
pub(crate) fn backward_reach(n: usize, edges: &[(usize, usize)], targets: &[bool]) -> Vec<bool> {
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        pred[b].push(a);
    }
    let mut seen = targets.to_vec();
    let mut work: Vec<usize> = (0..n).filter(|&v| targets[v]).collect();
    while let Some(v) = work.pop() {
        for &u in &pred[v] {
            if !seen[u] {
                seen[u] = true;
                work.push(u);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components() {
        let adj = [vec![1], vec![0, 2], vec![2], vec![]];
        let (comp, cyclic) = sccs(4, |v| adj[v].clone());
        assert_eq!(comp[0], comp[1]);
        assert_ne!(comp[1], comp[2]);
        assert!(cyclic[comp[0]]);
        assert!(cyclic[comp[2]]);
        assert!(!cyclic[comp[3]]);
    }
}
