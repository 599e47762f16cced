use std::net::SocketAddr;
use std::sync::Arc;

use clap::Parser;

use terrain_planner_service::{router, AppState, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "terrain-service", version, about = "HTTP API for interactive terrain planning")]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Replay speed, m/s.
    #[arg(long, default_value_t = 15.0)]
    speed: f64,
    /// Default planning budget, seconds.
    #[arg(long, default_value_t = 10.0)]
    budget_s: f64,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let config = ServiceConfig { replay_speed: args.speed, default_budget_s: args.budget_s, ..Default::default() };
    let app = router(Arc::new(AppState::new(config)));
    let listener = tokio::net::TcpListener::bind(args.addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await
}
