use std::io::Write;
use std::process::{Command, Stdio};

use lexinstruct_core::generate::{GenError, Screen};
use lexinstruct_core::Instruction;

/// Vetoes generated instructions with an external command.
///
/// The command runs through `sh -c` once per candidate with the instruction
/// as JSON on stdin. Exit status 0 keeps it, 1 rejects it, anything else
/// aborts generation.
pub struct CommandScreen {
    command: String,
}

impl CommandScreen {
    pub fn new(command: impl Into<String>) -> CommandScreen {
        CommandScreen { command: command.into() }
    }
}

impl Screen for CommandScreen {
    fn accept(&mut self, instruction: &Instruction) -> Result<bool, GenError> {
        let fail = |e: std::io::Error| GenError::Screen(format!("`{}`: {e}", self.command));
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .spawn()
            .map_err(fail)?;
        let payload = serde_json::to_vec(instruction).expect("instructions serialize");
        // A screen may exit without reading its input.
        let _ = child.stdin.take().expect("piped stdin").write_all(&payload);
        match child.wait().map_err(fail)?.code() {
            Some(0) => Ok(true),
            Some(1) => Ok(false),
            other => Err(GenError::Screen(format!("`{}` exited with {other:?}", self.command))),
        }
    }
}
