//! An oracle served by another process over line-delimited JSON.
//!
//! Request, one line: `{"goal": "<goal in prefix form>", "k": 16}`.
//! Response, one line: `{"tactics": [["T add_comm fwd 1", 0.5], ...], "critic": 0.7}`
//! or `{"error": "message"}`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::env::{Goal, Tactic};

use super::oracle::{Evaluation, OracleError, PolicyOracle};

#[derive(Serialize)]
struct Request<'a> {
    goal: &'a str,
    k: usize,
}

#[derive(Deserialize)]
struct Response {
    #[serde(default)]
    tactics: Vec<(String, f64)>,
    #[serde(default)]
    critic: Option<f64>,
    #[serde(default)]
    error: Option<String>,
}

struct Pipe {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

pub struct ExternalOracle {
    pipe: Mutex<Pipe>,
    name: String,
}

impl ExternalOracle {
    /// Starts `program` with `args`; its stderr is inherited.
    pub fn spawn(program: &str, args: &[String]) -> Result<Self, OracleError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| OracleError::Io(format!("cannot start `{program}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ExternalOracle { pipe: Mutex::new(Pipe { child, stdin, stdout }), name: format!("external:{program}") })
    }

    fn call(&self, goal: &Goal, k: usize) -> Result<Evaluation, OracleError> {
        let goal_text = goal.to_string();
        let request = serde_json::to_string(&Request { goal: &goal_text, k }).expect("requests serialize");
        let mut pipe = self.pipe.lock().map_err(|_| OracleError::Failed("oracle pipe poisoned".into()))?;
        writeln!(pipe.stdin, "{request}").and_then(|_| pipe.stdin.flush()).map_err(|e| OracleError::Io(e.to_string()))?;
        let mut line = String::new();
        let n = pipe.stdout.read_line(&mut line).map_err(|e| OracleError::Io(e.to_string()))?;
        if n == 0 {
            return Err(OracleError::Io("oracle process closed its output".into()));
        }
        let response: Response =
            serde_json::from_str(line.trim()).map_err(|e| OracleError::Protocol(format!("{e}: {}", line.trim())))?;
        if let Some(e) = response.error {
            return Err(OracleError::Failed(e));
        }
        let tactics = response
            .tactics
            .into_iter()
            .take(k)
            .map(|(t, p)| {
                t.parse::<Tactic>()
                    .map(|t| (t, p))
                    .map_err(|e| OracleError::Protocol(format!("bad tactic `{t}`: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Evaluation { tactics, critic: response.critic.unwrap_or(0.5) })
    }
}

impl PolicyOracle for ExternalOracle {
    fn suggest(&self, goal: &Goal, k: usize) -> Result<Vec<(Tactic, f64)>, OracleError> {
        Ok(self.call(goal, k)?.tactics)
    }

    fn critic(&self, goal: &Goal) -> Result<f64, OracleError> {
        Ok(self.call(goal, 0)?.critic)
    }

    fn evaluate(&self, goal: &Goal, k: usize) -> Result<Evaluation, OracleError> {
        self.call(goal, k)
    }

    fn name(&self) -> &str {
        &self.name
    }
}

impl Drop for ExternalOracle {
    fn drop(&mut self) {
        if let Ok(pipe) = self.pipe.get_mut() {
            let _ = pipe.child.kill();
            let _ = pipe.child.wait();
        }
    }
}
