use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use eventpin::api::{router, system_clock, tick_loop, AppState};
use eventpin::ingest::{parse_jsonl_messages, parse_whatsapp_export};
use eventpin::service::EventFilter;
use eventpin::sink::{LineSink, WebhookSink};
use eventpin::{Service, Store};
use eventpin_core::priority::{builtin_seed_examples, evaluate_split, parse_labeled_jsonl, Origin, DEFAULT_K};
use eventpin_core::time::{format_timestamp, parse_timestamp, Timestamp};
use eventpin_core::{DateOrder, EventStatus, Extractor, PriorityLevel};

#[derive(Parser)]
#[command(name = "eventpin", version, about = "Pinned reminders for events found in chat logs")]
struct Cli {
    /// Event log path.
    #[arg(long, global = true, env = "EVENT_STORE_PATH", default_value = "eventpin.jsonl")]
    store: PathBuf,
    /// Neighbours consulted by the prioritizer.
    #[arg(long, global = true, default_value_t = DEFAULT_K)]
    k: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Whatsapp,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Dmy,
    Mdy,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API and deliver notifications on a timer.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Seconds between delivery ticks.
        #[arg(long, default_value_t = 60)]
        tick_interval: u64,
        /// Directory served under /ui/.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
    /// Add messages from a chat export.
    Ingest {
        path: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        chat_id: Option<String>,
        #[arg(long)]
        group: bool,
        #[arg(long, value_enum, default_value = "dmy")]
        date_order: Order,
    },
    /// Extract events from messages not scanned yet.
    Scan {
        #[arg(long)]
        now: Option<String>,
    },
    ListEvents {
        #[arg(long)]
        status: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Deliver due notifications once.
    NotifyTick {
        #[arg(long)]
        now: Option<String>,
    },
    /// Acknowledge a notification or an event.
    Ack { id: String },
    /// Label an event's priority.
    Feedback {
        event_id: String,
        priority: PriorityLevel,
        #[arg(long)]
        now: Option<String>,
    },
    /// 70/30 split evaluation of the prioritizer.
    Eval {
        /// JSON lines of {"v":[..5..],"label":..}; the built-in seeds if omitted.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Rewrite the log with only live records.
    Compact,
}

fn now_or_clock(now: Option<&str>) -> Result<Timestamp> {
    match now {
        Some(s) => parse_timestamp(s).with_context(|| format!("--now {s}")),
        None => Ok(system_clock()()),
    }
}

fn open_service(cli: &Cli) -> Result<Service> {
    let (store, report) = Store::open(&cli.store)?;
    if let Some(tail) = report.dropped_tail {
        eprintln!("warning: dropped incomplete final record ({tail})");
    }
    let mut service = Service::new(store, Extractor::default(), cli.k)?.with_sink(Box::new(LineSink::stdout()));
    if let Some(webhook) = WebhookSink::from_env() {
        service = service.with_sink(Box::new(webhook));
    }
    Ok(service)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Serve {
            port,
            tick_interval,
            ui_dir,
        } => {
            let service = open_service(&cli)?;
            let app = AppState::new(service, system_clock());
            let routes = router(app.clone(), ui_dir.clone());
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", *port)).await?;
                eprintln!("listening on {}", listener.local_addr()?);
                tokio::spawn(tick_loop(app, Duration::from_secs((*tick_interval).max(1))));
                axum::serve(listener, routes)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
        }
        Command::Ingest {
            path,
            format,
            chat_id,
            group,
            date_order,
        } => {
            let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
            let messages = match format {
                Format::Whatsapp => {
                    let Some(chat_id) = chat_id else {
                        bail!("--chat-id is required for whatsapp exports");
                    };
                    let order = match date_order {
                        Order::Dmy => DateOrder::Dmy,
                        Order::Mdy => DateOrder::Mdy,
                    };
                    parse_whatsapp_export(&text, chat_id, *group, order)?
                }
                Format::Jsonl => {
                    let parsed = parse_jsonl_messages(&text);
                    for s in &parsed.skipped {
                        eprintln!("{}:{}: skipped: {}", path.display(), s.line, s.reason);
                    }
                    parsed.messages
                }
            };
            let mut service = open_service(&cli)?;
            let added = service.ingest(&messages, now_or_clock(None)?)?;
            println!("{added} new of {} messages", messages.len());
        }
        Command::Scan { now } => {
            let mut service = open_service(&cli)?;
            let report = service.run_scan(now_or_clock(now.as_deref())?)?;
            for w in &report.warnings {
                eprintln!("warning: {:?}: {}", w.expression, w.reason);
            }
            for e in &report.new_events {
                println!(
                    "{}  {:<12} {}  {:<6}  {} notifications",
                    e.event.id,
                    e.event.event_type,
                    format_timestamp(&e.event.occurs_at),
                    e.priority,
                    e.schedule.len()
                );
            }
            println!(
                "{} new events, {} notifications planned",
                report.new_events.len(),
                report.planned.len()
            );
        }
        Command::ListEvents { status, json } => {
            let status: Option<EventStatus> = status
                .as_deref()
                .map(|s| serde_json::from_value(serde_json::Value::String(s.to_string())))
                .transpose()
                .context("--status must be active, acknowledged or expired")?;
            let service = open_service(&cli)?;
            let events = service.events(&EventFilter {
                status,
                ..EventFilter::default()
            });
            if *json {
                println!("{}", serde_json::to_string_pretty(&events)?);
            } else {
                for e in &events {
                    let next = e.schedule.iter().find(|n| n.state.is_pinned());
                    println!(
                        "{}  {:<12} {}  {:<6}  {:<12}  next {}",
                        e.event.id,
                        e.event.event_type,
                        format_timestamp(&e.event.occurs_at),
                        e.priority,
                        format!("{:?}", e.event.status).to_lowercase(),
                        next.map_or("-".to_string(), |n| format_timestamp(&n.fire_at))
                    );
                }
            }
        }
        Command::NotifyTick { now } => {
            let mut service = open_service(&cli)?;
            let report = service.tick(now_or_clock(now.as_deref())?)?;
            for f in &report.failures {
                eprintln!("delivery failed: {f}");
            }
            eprintln!(
                "{} delivered, {} pending retry",
                report.delivered.len(),
                report.failures.len()
            );
        }
        Command::Ack { id } => {
            let mut service = open_service(&cli)?;
            service.acknowledge(id, now_or_clock(None)?)?;
            println!("acknowledged {id}");
        }
        Command::Feedback {
            event_id,
            priority,
            now,
        } => {
            let mut service = open_service(&cli)?;
            let view = service.apply_feedback(event_id, *priority, now_or_clock(now.as_deref())?)?;
            println!(
                "{} is now {} with {} notifications",
                view.event.id,
                view.priority,
                view.schedule.len()
            );
        }
        Command::Eval { dataset, k, seed } => {
            let examples = match dataset {
                Some(path) => {
                    let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
                    parse_labeled_jsonl(&text, Origin::Seed).with_context(|| path.display().to_string())?
                }
                None => builtin_seed_examples(),
            };
            let eval = evaluate_split(&examples, *k, *seed)?;
            println!(
                "train {}  test {}  k {}  seed {}",
                eval.train_size, eval.test_size, k, seed
            );
            let correct: u32 = (0..3).map(|i| eval.confusion[i][i]).sum();
            println!("accuracy {:.6} ({correct}/{})", eval.accuracy, eval.test_size);
            println!("actual \\ predicted   High  Medium     Low");
            for level in PriorityLevel::ALL {
                let row = eval.confusion[level.index()];
                println!("{:<20} {:>5} {:>7} {:>7}", level.as_str(), row[0], row[1], row[2]);
            }
        }
        Command::Compact => {
            let mut service = open_service(&cli)?;
            let before = service.store().state().last_seq;
            let kept = service.store_mut().compact(now_or_clock(None)?)?;
            println!("compacted {before} records into {kept}");
        }
    }
    Ok(())
}
