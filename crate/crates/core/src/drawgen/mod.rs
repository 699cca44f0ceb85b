//! The generative system: genome decoding, curl-noise flow field and the
//! particle renderer that turns a genome into a line drawing.

mod genome;
mod noise;
mod render;

pub use genome::{AgentParams, GENE_COUNT, Genome, PARAM_RANGES, map_genome};
pub use noise::{FlowField, GradientNoise, NoiseSample, flow_velocity};
pub use render::{
    MIN_CANVAS, Particle, REFERENCE_CANVAS, RenderStats, render, render_params,
    render_with_stats, spawn_particles,
};
