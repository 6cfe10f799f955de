//! In-memory CSV tables in the core's number format.

use cgdyn_core::csvfmt::num;

#[derive(Debug, Clone)]
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            text: format!("{}\n", header.join(",")),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    /// A row whose first cell is text.
    pub fn labeled_row(&mut self, label: &str, values: &[f64]) {
        self.text.push_str(label);
        for &v in values {
            self.text.push(',');
            self.text.push_str(&num(v));
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}
