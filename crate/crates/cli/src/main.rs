use clap::error::ErrorKind;
use clap::Parser;
use mzi_cli::{execute, Args};

fn fail(kind: &str, message: String, keys: Vec<String>, code: i32) -> ! {
    let report = serde_json::json!({ "kind": kind, "message": message, "keys": keys });
    eprintln!("{report}");
    std::process::exit(code)
}

fn main() {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let keys = e
                .get(clap::error::ContextKind::InvalidArg)
                .map(|a| vec![a.to_string()])
                .unwrap_or_default();
            fail("usage", e.kind().to_string(), keys, 2)
        }
    };
    match execute(&args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            let r = e.report();
            fail(r.kind, r.message, r.keys, e.exit_code())
        }
    }
}
