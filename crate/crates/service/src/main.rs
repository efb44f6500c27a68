use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::Parser;

use sketchscreen_core::index::load_index;
use sketchscreen_core::recognizer::{load_templates, TemplateRecognizer, TemplateSet};
use sketchscreen_core::scorer::Hyperparams;
use sketchscreen_service::{router, App, Engine};

/// Serve interactive sketch search over a prebuilt screen index.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Index file produced by `sketchscreen index`.
    #[arg(long)]
    index: PathBuf,
    /// Template file; the bundled templates are used when omitted.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Scoring weights as p1,p2,p3,delta_w,c_w.
    #[arg(long, default_value = "39,8,9,0.4,11")]
    hp: Hyperparams,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .init();
    let args = Args::parse();
    let index = load_index(&args.index).with_context(|| format!("loading {}", args.index.display()))?;
    let templates = match &args.templates {
        Some(p) => load_templates(p).with_context(|| format!("loading {}", p.display()))?,
        None => TemplateSet::bundled(),
    };
    tracing::info!(screens = index.screen_count(), hp = %args.hp, "index loaded");
    let app = Arc::new(App::new(Engine {
        index,
        recognizer: Box::new(TemplateRecognizer::new(templates)),
        hp: args.hp,
    }));
    let addr = SocketAddr::from(([127, 0, 0, 1], args.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(app)).await?;
    Ok(())
}
