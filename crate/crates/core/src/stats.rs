//! Size comparison between an input description and its OpenDRIVE output.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextSize {
    pub lines: usize,
    pub chars: usize,
}

impl TextSize {
    /// Newlines plus one, and raw bytes.
    pub fn of(text: &str) -> TextSize {
        TextSize { lines: text.bytes().filter(|b| *b == b'\n').count() + 1, chars: text.len() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeReport {
    pub output: TextSize,
    pub input: TextSize,
}

impl SizeReport {
    pub fn new(input: &str, output: &str) -> SizeReport {
        SizeReport { output: TextSize::of(output), input: TextSize::of(input) }
    }

    /// Input lines as a percentage of output lines.
    pub fn line_ratio(&self) -> f64 {
        100.0 * self.input.lines as f64 / self.output.lines as f64
    }

    pub fn char_ratio(&self) -> f64 {
        100.0 * self.input.chars as f64 / self.output.chars as f64
    }
}

impl fmt::Display for SizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:>10} {:>12}", "", "lines", "chars")?;
        writeln!(f, "{:<12} {:>10} {:>12}", "OpenDRIVE", self.output.lines, self.output.chars)?;
        writeln!(f, "{:<12} {:>10} {:>12}", "input", self.input.lines, self.input.chars)?;
        write!(f, "{:<12} {:>9.1}% {:>11.1}%", "ratio", self.line_ratio(), self.char_ratio())
    }
}
