use std::fmt::Write as _;

use crate::controller::ActionOutcome;
use crate::trace::event::EventKind;
use crate::trace::sink::EpisodeTrace;
use crate::types::{AgentId, Tick};

const PLOT_WIDTH: f64 = 800.0;
const LABEL_GUTTER: f64 = 160.0;
const TOP: f64 = 40.0;
const LANE_HEIGHT: f64 = 22.0;
const LANE_GAP: f64 = 6.0;
/// Minimum visible bar width; spans of one tick or more stay strictly
/// proportional, zero-tick bars degrade to this sliver.
const MIN_BAR: f64 = 2.0;

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Bar {
    start: Tick,
    end: Tick,
    label: String,
    class: &'static str,
}

/// Render an episode trace as an SVG timeline: one communication lane with
/// a marker per room opening, then per agent a plan lane (bars colored by
/// outcome) and an action lane (one labeled bar per closed action).
pub fn render_timeline(trace: &EpisodeTrace) -> String {
    let agents = trace.agents();
    let end_tick = trace.end_tick().max(1);
    let ppt = PLOT_WIDTH / end_tick as f64;
    let x_of = |tick: Tick| LABEL_GUTTER + tick as f64 * ppt;

    let lane_count = if agents.is_empty() { 1 } else { 1 + 2 * agents.len() };
    let height = TOP + lane_count as f64 * (LANE_HEIGHT + LANE_GAP) + 20.0;
    let width = LABEL_GUTTER + PLOT_WIDTH + 20.0;
    let lane_y = |index: usize| TOP + index as f64 * (LANE_HEIGHT + LANE_GAP);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    svg.push_str(
        "<style>\n\
         text{font-family:monospace;font-size:10px;fill:#222}\n\
         .lane-label{font-size:11px}\n\
         .lane-bg{fill:#f5f5f5}\n\
         .axis{stroke:#444;stroke-width:1}\n\
         .comm-marker{fill:#1e88e5}\n\
         .plan-bar.success{fill:#4caf50}\n\
         .plan-bar.fail{fill:#e53935}\n\
         .plan-bar.truncated{fill:#9e9e9e}\n\
         .action-bar.success{fill:#81c784;stroke:#2e7d32;stroke-width:0.5}\n\
         .action-bar.fail{fill:#ef9a9a;stroke:#b71c1c;stroke-width:0.5}\n\
         </style>\n",
    );

    // Axis with numeric tick marks.
    let axis_y = TOP - 12.0;
    let _ = writeln!(
        svg,
        "<g class=\"axis-group\"><line class=\"axis\" x1=\"{:.1}\" y1=\"{axis_y:.1}\" \
         x2=\"{:.1}\" y2=\"{axis_y:.1}\"/>",
        LABEL_GUTTER,
        LABEL_GUTTER + PLOT_WIDTH
    );
    let step = (end_tick / 10).max(1);
    let mut mark = 0;
    while mark <= end_tick {
        let x = x_of(mark);
        let _ = writeln!(
            svg,
            "<line class=\"axis\" x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{axis_y:.1}\"/>\
             <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{mark}</text>",
            axis_y - 4.0,
            axis_y - 8.0
        );
        mark += step;
    }
    svg.push_str("</g>\n");

    // Communication lane: one marker per room opening.
    let comm_y = lane_y(0);
    let _ = writeln!(
        svg,
        "<g class=\"comm-lane\"><rect class=\"lane-bg\" x=\"{:.1}\" y=\"{comm_y:.1}\" \
         width=\"{PLOT_WIDTH:.1}\" height=\"{LANE_HEIGHT:.1}\"/>\
         <text class=\"lane-label\" x=\"4\" y=\"{:.1}\">communication</text>",
        LABEL_GUTTER,
        comm_y + LANE_HEIGHT - 7.0
    );
    for event in &trace.events {
        if matches!(event.kind, EventKind::CommOpen { .. }) {
            let _ = writeln!(
                svg,
                "<circle class=\"comm-marker\" cx=\"{:.1}\" cy=\"{:.1}\" r=\"4\"/>",
                x_of(event.tick),
                comm_y + LANE_HEIGHT / 2.0
            );
        }
    }
    svg.push_str("</g>\n");

    for (position, &agent) in agents.iter().enumerate() {
        let plan_bars = collect_plan_bars(trace, agent);
        let action_bars = collect_action_bars(trace, agent);
        let lanes = [
            (format!("{agent} plans"), "plans", plan_bars),
            (format!("{agent} actions"), "actions", action_bars),
        ];
        for (offset, (label, kind, bars)) in lanes.into_iter().enumerate() {
            let y = lane_y(1 + 2 * position + offset);
            let _ = writeln!(
                svg,
                "<g class=\"agent-lane\" data-agent=\"{}\" data-kind=\"{kind}\">\
                 <rect class=\"lane-bg\" x=\"{:.1}\" y=\"{y:.1}\" width=\"{PLOT_WIDTH:.1}\" \
                 height=\"{LANE_HEIGHT:.1}\"/>\
                 <text class=\"lane-label\" x=\"4\" y=\"{:.1}\">{}</text>",
                agent.0,
                LABEL_GUTTER,
                y + LANE_HEIGHT - 7.0,
                xml_escape(&label)
            );
            for bar in bars {
                let x = x_of(bar.start);
                let w = ((bar.end - bar.start) as f64 * ppt).max(MIN_BAR);
                let class = if kind == "plans" { "plan-bar" } else { "action-bar" };
                let _ = writeln!(
                    svg,
                    "<rect class=\"{class} {}\" x=\"{x:.1}\" y=\"{:.1}\" width=\"{w:.1}\" \
                     height=\"{:.1}\" data-start=\"{}\" data-end=\"{}\"><title>{}</title></rect>",
                    bar.class,
                    y + 3.0,
                    LANE_HEIGHT - 6.0,
                    bar.start,
                    bar.end,
                    xml_escape(&bar.label)
                );
                if kind == "actions" {
                    let _ = writeln!(
                        svg,
                        "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
                        x + 2.0,
                        y + LANE_HEIGHT - 7.0,
                        xml_escape(bar.label.split('(').next().unwrap_or(""))
                    );
                }
            }
            svg.push_str("</g>\n");
        }
    }

    svg.push_str("</svg>\n");
    svg
}

fn collect_plan_bars(trace: &EpisodeTrace, agent: AgentId) -> Vec<Bar> {
    let mut bars = Vec::new();
    let mut open: Option<(Tick, String)> = None;
    for event in trace.events.iter().filter(|e| e.agent == Some(agent)) {
        match &event.kind {
            EventKind::PlanStart { plan } => {
                open = Some((event.tick, format!("plan for {}", plan.committed_task)));
            }
            EventKind::PlanEnd { outcome } => {
                if let Some((start, label)) = open.take() {
                    let class = if *outcome { "success" } else { "fail" };
                    bars.push(Bar { start, end: event.tick, label, class });
                }
            }
            _ => {}
        }
    }
    if let Some((start, label)) = open {
        bars.push(Bar { start, end: trace.end_tick(), label, class: "truncated" });
    }
    bars
}

fn collect_action_bars(trace: &EpisodeTrace, agent: AgentId) -> Vec<Bar> {
    let mut bars = Vec::new();
    let mut open: Option<(Tick, String)> = None;
    for event in trace.events.iter().filter(|e| e.agent == Some(agent)) {
        match &event.kind {
            EventKind::ActionStart { action, .. } => {
                open = Some((event.tick, action.to_string()));
            }
            EventKind::ActionEnd { outcome, .. } => {
                // Exactly one bar per START/END pair; an unmatched start
                // (truncated episode) renders nothing.
                if let Some((start, label)) = open.take() {
                    let class = match outcome {
                        ActionOutcome::Success => "success",
                        ActionOutcome::Failed { .. } => "fail",
                    };
                    bars.push(Bar { start, end: event.tick, label, class });
                }
            }
            _ => {}
        }
    }
    bars
}
