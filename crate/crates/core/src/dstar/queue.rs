use std::cmp::Ordering;

use crate::model::VertexId;

use super::Key;

const ABSENT: usize = usize::MAX;

/// Binary min-heap keyed by vertex, with a position index so that update
/// and remove are O(log n). Ties on equal keys go to the lowest vertex id.
#[derive(Debug, Clone)]
pub struct KeyedQueue {
    heap: Vec<(Key, VertexId)>,
    pos: Vec<usize>,
}

fn less(a: &(Key, VertexId), b: &(Key, VertexId)) -> bool {
    match a.0.cmp_total(&b.0) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.1 < b.1,
    }
}

impl KeyedQueue {
    pub fn new(n: usize) -> Self {
        KeyedQueue {
            heap: Vec::new(),
            pos: vec![ABSENT; n],
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.pos[v.index()] != ABSENT
    }

    pub fn top(&self) -> Option<(VertexId, Key)> {
        self.heap.first().map(|&(k, v)| (v, k))
    }

    pub fn top_key(&self) -> Key {
        self.heap.first().map(|e| e.0).unwrap_or(Key::INFINITE)
    }

    pub fn key_of(&self, v: VertexId) -> Option<Key> {
        match self.pos[v.index()] {
            ABSENT => None,
            i => Some(self.heap[i].0),
        }
    }

    pub fn insert(&mut self, v: VertexId, key: Key) {
        debug_assert!(!self.contains(v));
        let i = self.heap.len();
        self.heap.push((key, v));
        self.pos[v.index()] = i;
        self.sift_up(i);
    }

    /// Changes the key of a queued vertex, in either direction.
    pub fn update(&mut self, v: VertexId, key: Key) {
        let i = self.pos[v.index()];
        debug_assert!(i != ABSENT);
        self.heap[i].0 = key;
        let i = self.sift_up(i);
        self.sift_down(i);
    }

    pub fn remove(&mut self, v: VertexId) {
        let i = self.pos[v.index()];
        if i == ABSENT {
            return;
        }
        let last = self.heap.len() - 1;
        self.swap(i, last);
        self.heap.pop();
        self.pos[v.index()] = ABSENT;
        if i < self.heap.len() {
            let i = self.sift_up(i);
            self.sift_down(i);
        }
    }

    pub fn pop(&mut self) -> Option<(VertexId, Key)> {
        let top = self.top()?;
        self.remove(top.0);
        Some(top)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, Key)> + '_ {
        self.heap.iter().map(|&(k, v)| (v, k))
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a].1.index()] = a;
        self.pos[self.heap[b].1.index()] = b;
    }

    fn sift_up(&mut self, mut i: usize) -> usize {
        while i > 0 {
            let parent = (i - 1) / 2;
            if less(&self.heap[i], &self.heap[parent]) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
        i
    }

    fn sift_down(&mut self, mut i: usize) -> usize {
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            let r = l + 1;
            let mut m = i;
            if l < n && less(&self.heap[l], &self.heap[m]) {
                m = l;
            }
            if r < n && less(&self.heap[r], &self.heap[m]) {
                m = r;
            }
            if m == i {
                return i;
            }
            self.swap(i, m);
            i = m;
        }
    }
}
