//! Per-flow controller that runs a shared policy over a private window.

use std::cell::RefCell;
use std::rc::Rc;

use crate::policy::{ActionMapper, ObservationWindow, PolicyModel, RewardParams};
use crate::sim::{Controller, ProbeContext};

/// Hook invoked after every policy evaluation, before the action is applied.
/// The trainer uses it to collect transitions and run gradient updates in
/// place; evaluation sinks only accumulate statistics.
pub trait DecisionSink {
    fn on_decision(
        &mut self,
        model: &mut PolicyModel,
        mapper: &ActionMapper,
        features: &[f64],
        delta: f64,
        raw_output: f64,
    );
}

/// Sink that does nothing; used for frozen closed-loop runs.
pub struct NoSink;

impl DecisionSink for NoSink {
    fn on_decision(&mut self, _: &mut PolicyModel, _: &ActionMapper, _: &[f64], _: f64, _: f64) {}
}

/// Policy state shared by every flow of one engine. Controllers hold an
/// `Rc<RefCell<..>>` to it; the engine is single-threaded so borrows never
/// overlap across flows.
pub struct RlccShared<S> {
    pub model: PolicyModel,
    pub mapper: ActionMapper,
    pub sink: S,
}

impl<S> RlccShared<S> {
    pub fn new(model: PolicyModel, mapper: ActionMapper, sink: S) -> Rc<RefCell<Self>> {
        Rc::new(RefCell::new(RlccShared { model, mapper, sink }))
    }
}

/// One flow's view of the shared policy: its own observation window and the
/// last action taken (in raw-output space).
pub struct RlccController<S> {
    shared: Rc<RefCell<RlccShared<S>>>,
    params: RewardParams,
    window: ObservationWindow,
    last_action: f64,
}

impl<S: DecisionSink> RlccController<S> {
    pub fn new(shared: Rc<RefCell<RlccShared<S>>>, params: RewardParams, window_len: usize) -> Self {
        // Neutral start: delta slots at `target` (uncongested), actions at 0.
        let window = ObservationWindow::new(window_len, params.target);
        RlccController {
            shared,
            params,
            window,
            last_action: 0.0,
        }
    }
}

impl<S: DecisionSink + 'static> Controller for RlccController<S> {
    fn decide(&mut self, ctx: &ProbeContext<'_>) -> f64 {
        let inflation = ctx.measured_rtt_us / ctx.cfg.base_rtt_us;
        let delta = self
            .params
            .delta(inflation, ctx.current_rate_gbps, ctx.cfg.line_rate_gbps);
        // The newest window slot is (delta_t, a_{t-1}).
        self.window.push(delta, self.last_action);

        let mut shared = self.shared.borrow_mut();
        let RlccShared { model, mapper, sink } = &mut *shared;
        let raw = model.raw_output(self.window.features());
        sink.on_decision(model, mapper, self.window.features(), delta, raw);

        let action = mapper.clamp_raw(raw);
        self.last_action = action;
        ctx.current_rate_gbps * action.exp()
    }
}
