pub mod cmd_lang;
pub mod eval_harness;
pub mod grounding;
pub mod knowledge;
pub mod llm_bridge;
pub mod neighbor_graph;
pub mod world_model;
