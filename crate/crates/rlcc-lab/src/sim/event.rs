//! Event queue plumbing: totally ordered events keyed by (time, flow, seq).

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    FlowStart,
    /// The probe issued at `issued_us` reaches the sender with a fresh RTT
    /// measurement.
    ProbeArrival { issued_us: f64 },
    /// The controller's decision becomes actionable, `decision_latency_us`
    /// after the probe arrived.
    DecisionReady { measured_rtt_us: f64, ecn_marked: bool },
    /// Fires when a finite flow's remaining bytes reach zero; stale events
    /// are ignored via the generation counter.
    FlowEnd { generation: u64 },
    MetricsSample,
}

#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub time_us: f64,
    pub flow: FlowId,
    pub seq: u64,
    pub kind: EventKind,
}

/// Flow id used for events not tied to any flow; sorts after flow events at
/// the same timestamp so samples observe a fully settled tick.
pub const NO_FLOW: FlowId = FlowId(usize::MAX);

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time_us
            .total_cmp(&other.time_us)
            .then_with(|| self.flow.cmp(&other.flow))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    fn ev(time_us: f64, flow: usize, seq: u64) -> Event {
        Event {
            time_us,
            flow: FlowId(flow),
            seq,
            kind: EventKind::MetricsSample,
        }
    }

    #[test]
    fn heap_pops_in_time_flow_seq_order() {
        let mut heap = BinaryHeap::new();
        for e in [ev(2.0, 0, 5), ev(1.0, 3, 2), ev(1.0, 1, 9), ev(1.0, 1, 3)] {
            heap.push(Reverse(e));
        }
        let order: Vec<(f64, usize, u64)> = std::iter::from_fn(|| heap.pop())
            .map(|Reverse(e)| (e.time_us, e.flow.0, e.seq))
            .collect();
        assert_eq!(order, vec![(1.0, 1, 3), (1.0, 1, 9), (1.0, 3, 2), (2.0, 0, 5)]);
    }

    #[test]
    fn sentinel_flow_sorts_last_within_tick() {
        let sample = Event { flow: NO_FLOW, ..ev(1.0, 0, 1) };
        assert!(ev(1.0, 100, 99) < sample);
        assert!(ev(1.5, 0, 0) > sample);
    }
}
