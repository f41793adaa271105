//! Bit-level model of an XDWM array.
//!
//! Rows are X-NWs of `cols` domains (padding included). A Y-NW at column
//! `c` owns the domains at `(r, c)` for its rows plus its own extra domains
//! above and below the bundle; those shared X-Cells are stored once, in
//! the row grid, so both wires always see the same value.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One domain: a bit or vacant.
pub type Slot = Option<bool>;

/// Shift direction along a wire. `Left`/`Right` apply to X-NWs, `Up`/`Down`
/// to Y-NWs; up is towards row 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
}

/// What enters the trailing end of a shifted wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fill {
    #[default]
    Vacant,
    Zero,
    One,
    /// The end domain grows: its value is copied. This is what a wall
    /// shift does physically.
    Replicate,
}

/// What happens to a value pushed off the leading end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    /// Losing a non-vacant value is an error.
    #[default]
    Lossless,
    Lossy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YNw {
    pub column: usize,
    /// Rows crossed, `start..end`.
    pub rows: Range<usize>,
    /// Own domains above the bundle, top first.
    pub above: Vec<Slot>,
    /// Own domains below the bundle, top first.
    pub below: Vec<Slot>,
}

impl YNw {
    pub fn len(&self) -> usize {
        self.above.len() + self.rows.len() + self.below.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Access ports: columns per row and a domain index per Y-NW.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortMap {
    pub rows: Vec<Vec<usize>>,
    pub ynws: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayState {
    cols: usize,
    padding: usize,
    grid: Vec<Vec<Slot>>,
    ynws: Vec<YNw>,
    pub fill: Fill,
    pub edge: Edge,
    /// Fill used by logical word shifts.
    pub logical_fill: Fill,
    pub ports: PortMap,
}

/// Rows selected by an X shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rows {
    All,
    Subset(Vec<usize>),
}

impl ArrayState {
    /// `rows` X-NWs of `data_cols` zero bits with `padding` vacant domains
    /// at each end.
    pub fn new(rows: usize, data_cols: usize, padding: usize) -> Result<Self> {
        if rows == 0 || data_cols == 0 {
            return Err(Error::InvalidParameter("array needs at least one row and column".into()));
        }
        let cols = data_cols + 2 * padding;
        let mut row = vec![None; cols];
        for s in &mut row[padding..padding + data_cols] {
            *s = Some(false);
        }
        Ok(Self {
            cols,
            padding,
            grid: vec![row; rows],
            ynws: Vec::new(),
            fill: Fill::default(),
            edge: Edge::default(),
            logical_fill: Fill::Zero,
            ports: PortMap {
                rows: vec![vec![padding]; rows],
                ynws: Vec::new(),
            },
        })
    }

    /// Grid of explicit slots without padding bookkeeping.
    pub fn from_grid(grid: Vec<Vec<Slot>>, padding: usize) -> Result<Self> {
        let rows = grid.len();
        let cols = grid.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 || grid.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("grid rows must be non-empty and equally long".into()));
        }
        if 2 * padding >= cols {
            return Err(Error::InvalidParameter("padding leaves no data columns".into()));
        }
        Ok(Self {
            cols,
            padding,
            grid,
            ynws: Vec::new(),
            fill: Fill::default(),
            edge: Edge::default(),
            logical_fill: Fill::Zero,
            ports: PortMap {
                rows: vec![vec![padding]; rows],
                ynws: Vec::new(),
            },
        })
    }

    /// Adds a Y-NW crossing `rows` at `column` with `above`/`below` own
    /// domains (initially zero). Returns its index.
    pub fn add_ynw(&mut self, column: usize, rows: Range<usize>, above: usize, below: usize) -> Result<usize> {
        if column >= self.cols {
            return Err(Error::InvalidPlacement(format!("column {column} outside 0..{}", self.cols)));
        }
        if rows.start >= rows.end || rows.end > self.grid.len() {
            return Err(Error::InvalidPlacement(format!(
                "rows {}..{} outside 0..{}",
                rows.start,
                rows.end,
                self.grid.len()
            )));
        }
        if self.ynws.iter().any(|y| y.column == column) {
            return Err(Error::InvalidPlacement(format!("column {column} already has a Y-NW")));
        }
        self.ynws.push(YNw {
            column,
            rows,
            above: vec![Some(false); above],
            below: vec![Some(false); below],
        });
        self.ports.ynws.push(0);
        Ok(self.ynws.len() - 1)
    }

    pub fn rows(&self) -> usize {
        self.grid.len()
    }

    /// Domains per row, padding included.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn ynws(&self) -> &[YNw] {
        &self.ynws
    }

    pub fn grid(&self) -> &[Vec<Slot>] {
        &self.grid
    }

    pub fn get(&self, row: usize, col: usize) -> Slot {
        self.grid[row][col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Slot) {
        self.grid[row][col] = v;
    }

    /// Values along Y-NW `y`, top first.
    pub fn ynw_values(&self, y: usize) -> Vec<Slot> {
        let w = &self.ynws[y];
        let mut v = w.above.clone();
        v.extend(w.rows.clone().map(|r| self.grid[r][w.column]));
        v.extend(w.below.iter().copied());
        v
    }

    fn set_ynw_values(&mut self, y: usize, v: &[Slot]) {
        let (na, col, rows) = {
            let w = &self.ynws[y];
            (w.above.len(), w.column, w.rows.clone())
        };
        let nr = rows.len();
        for (k, r) in rows.enumerate() {
            self.grid[r][col] = v[na + k];
        }
        let w = &mut self.ynws[y];
        w.above.copy_from_slice(&v[..na]);
        w.below.copy_from_slice(&v[na + nr..]);
    }

    /// Every non-vacant value, X-Cells counted once.
    pub fn bits(&self) -> Vec<bool> {
        let mut out: Vec<bool> = self.grid.iter().flatten().filter_map(|s| *s).collect();
        for w in &self.ynws {
            out.extend(w.above.iter().chain(&w.below).filter_map(|s| *s));
        }
        out
    }

    pub fn ynw_index(&self, column: usize) -> Option<usize> {
        self.ynws.iter().position(|y| y.column == column)
    }
}

/// Moves `line` one place towards index 0 (`towards_start`) or away from
/// it, filling the trailing end per `fill`. Returns the value pushed out.
fn shift_line(line: &mut [Slot], towards_start: bool, fill: Fill) -> Slot {
    let n = line.len();
    if n == 0 {
        return None;
    }
    let (lead, trail) = if towards_start { (0, n - 1) } else { (n - 1, 0) };
    let out = line[lead];
    let entering = match fill {
        Fill::Vacant => None,
        Fill::Zero => Some(false),
        Fill::One => Some(true),
        Fill::Replicate => line[trail],
    };
    if towards_start {
        line.copy_within(1.., 0);
    } else {
        line.copy_within(..n - 1, 1);
    }
    line[trail] = entering;
    out
}

fn check_loss(edge: Edge, lost: Slot, what: &str) -> Result<()> {
    if edge == Edge::Lossless && lost.is_some() {
        return Err(Error::Overflow(format!("{what} would push a stored bit off its end")));
    }
    Ok(())
}

/// Shifts the selected X-NWs one domain.
pub fn shift_x(state: &ArrayState, dir: Direction, rows: &Rows) -> Result<ArrayState> {
    let towards_start = match dir {
        Direction::Left => true,
        Direction::Right => false,
        _ => return Err(Error::InvalidParameter("X-NWs shift left or right".into())),
    };
    let selected: Vec<usize> = match rows {
        Rows::All => (0..state.rows()).collect(),
        Rows::Subset(r) => r.clone(),
    };
    let mut next = state.clone();
    for &r in &selected {
        if r >= state.rows() {
            return Err(Error::InvalidParameter(format!("row {r} outside 0..{}", state.rows())));
        }
        let lost = shift_line(&mut next.grid[r], towards_start, state.fill);
        check_loss(state.edge, lost, &format!("shifting row {r}"))?;
    }
    Ok(next)
}

/// Shifts Y-NW `y` one domain.
pub fn shift_y(state: &ArrayState, y: usize, dir: Direction) -> Result<ArrayState> {
    let towards_start = match dir {
        Direction::Up => true,
        Direction::Down => false,
        _ => return Err(Error::InvalidParameter("Y-NWs shift up or down".into())),
    };
    if y >= state.ynws.len() {
        return Err(Error::InvalidParameter(format!("no Y-NW {y}")));
    }
    let mut line = state.ynw_values(y);
    let lost = shift_line(&mut line, towards_start, state.fill);
    check_loss(state.edge, lost, &format!("shifting Y-NW {y}"))?;
    let mut next = state.clone();
    next.set_ynw_values(y, &line);
    Ok(next)
}

/// An X shift of `rows` and a Y shift of `y` in the same step. Only
/// allowed when the Y-NW crosses none of the shifted rows.
pub fn shift_simultaneous(
    state: &ArrayState,
    x_dir: Direction,
    rows: &Rows,
    y: usize,
    y_dir: Direction,
) -> Result<ArrayState> {
    let w = state
        .ynws
        .get(y)
        .ok_or_else(|| Error::InvalidParameter(format!("no Y-NW {y}")))?;
    let clash = match rows {
        Rows::All => true,
        Rows::Subset(r) => r.iter().any(|r| w.rows.contains(r)),
    };
    if clash {
        return Err(Error::InvalidPlacement(format!(
            "Y-NW {y} shares X-Cells with the shifted rows"
        )));
    }
    shift_y(&shift_x(state, x_dir, rows)?, y, y_dir)
}

/// Bit under port `port` of `row`.
pub fn read(state: &ArrayState, row: usize, port: usize) -> Result<bool> {
    let col = port_column(state, row, port)?;
    state.grid[row][col].ok_or_else(|| Error::Misaligned(format!("row {row} port {port} faces a vacant domain")))
}

pub fn write(state: &ArrayState, row: usize, port: usize, bit: bool) -> Result<ArrayState> {
    let col = port_column(state, row, port)?;
    if state.grid[row][col].is_none() {
        return Err(Error::Misaligned(format!("row {row} port {port} faces a vacant domain")));
    }
    let mut next = state.clone();
    next.grid[row][col] = Some(bit);
    Ok(next)
}

fn port_column(state: &ArrayState, row: usize, port: usize) -> Result<usize> {
    state
        .ports
        .rows
        .get(row)
        .and_then(|p| p.get(port))
        .copied()
        .filter(|&c| c < state.cols)
        .ok_or_else(|| Error::Misaligned(format!("row {row} has no port {port}")))
}

/// Bit under the port of Y-NW `y`.
pub fn read_y(state: &ArrayState, y: usize) -> Result<bool> {
    let k = *state
        .ports
        .ynws
        .get(y)
        .ok_or_else(|| Error::Misaligned(format!("no Y-NW {y}")))?;
    state
        .ynw_values(y)
        .get(k)
        .copied()
        .flatten()
        .ok_or_else(|| Error::Misaligned(format!("Y-NW {y} port faces a vacant domain")))
}

/// Shifts the word held by `rows` at the Y-NW `column` by `amount`
/// domains (positive is down, towards higher rows). Bits leaving the word
/// are dropped and the state's logical fill enters, as in an arithmetic
/// shift; the rest of the array is untouched.
pub fn logical_shift_word(state: &ArrayState, rows: Range<usize>, column: usize, amount: i64) -> Result<ArrayState> {
    let y = state
        .ynw_index(column)
        .ok_or_else(|| Error::InvalidPlacement(format!("no Y-NW at column {column}")))?;
    let w = &state.ynws[y];
    if rows.start < w.rows.start || rows.end > w.rows.end {
        return Err(Error::InvalidPlacement(format!(
            "rows {}..{} not spanned by the Y-NW at column {column}",
            rows.start, rows.end
        )));
    }
    let towards_start = amount < 0;
    let mut word: Vec<Slot> = rows.clone().map(|r| state.grid[r][column]).collect();
    for _ in 0..amount.unsigned_abs().min(word.len() as u64) {
        shift_line(&mut word, towards_start, state.logical_fill);
    }
    let mut next = state.clone();
    for (r, v) in rows.zip(word) {
        next.grid[r][column] = v;
    }
    Ok(next)
}

// ---------------------------------------------------------------------------
// Text formats

fn slot_char(s: Slot) -> char {
    match s {
        Some(true) => '1',
        Some(false) => '0',
        None => '.',
    }
}

fn parse_slots(s: &str, line: usize) -> Result<Vec<Slot>> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|c| match c {
            '1' => Ok(Some(true)),
            '0' => Ok(Some(false)),
            '.' => Ok(None),
            _ => Err(Error::Parse {
                line,
                msg: format!("bad slot character {c:?}"),
            }),
        })
        .collect()
}

fn slots(v: &[Slot]) -> String {
    if v.is_empty() {
        "-".into()
    } else {
        v.iter().map(|s| slot_char(*s)).collect()
    }
}

fn fill_name(f: Fill) -> &'static str {
    match f {
        Fill::Vacant => "vacant",
        Fill::Zero => "zero",
        Fill::One => "one",
        Fill::Replicate => "replicate",
    }
}

fn parse_fill(s: &str, line: usize) -> Result<Fill> {
    Ok(match s {
        "vacant" => Fill::Vacant,
        "zero" => Fill::Zero,
        "one" => Fill::One,
        "replicate" => Fill::Replicate,
        _ => return Err(Error::Parse { line, msg: format!("unknown fill {s:?}") }),
    })
}

pub const GRID_HEADER: &str = "xdwm-array v1";

impl fmt::Display for ArrayState {
    /// ```text
    /// xdwm-array v1
    /// padding 1
    /// fill vacant
    /// edge lossless
    /// logical zero
    /// ynw <column> <row start> <row end> <above|-> <below|->
    /// grid
    /// .0110.
    /// ```
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{GRID_HEADER}")?;
        writeln!(f, "padding {}", self.padding)?;
        writeln!(f, "fill {}", fill_name(self.fill))?;
        writeln!(f, "edge {}", if self.edge == Edge::Lossless { "lossless" } else { "lossy" })?;
        writeln!(f, "logical {}", fill_name(self.logical_fill))?;
        for w in &self.ynws {
            writeln!(f, "ynw {} {} {} {} {}", w.column, w.rows.start, w.rows.end, slots(&w.above), slots(&w.below))?;
        }
        writeln!(f, "grid")?;
        for r in &self.grid {
            writeln!(f, "{}", slots(r))?;
        }
        Ok(())
    }
}

/// Parses the grid format written by `Display`.
pub fn parse_grid(text: &str) -> Result<ArrayState> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    match lines.next() {
        Some((_, l)) if l == GRID_HEADER => {}
        Some((n, _)) => return Err(err(n, "missing xdwm-array v1 header")),
        None => return Err(err(1, "empty grid file")),
    }
    let mut padding = 0;
    let mut fill = Fill::Vacant;
    let mut edge = Edge::Lossless;
    let mut logical = Fill::Zero;
    let mut ynws: Vec<(usize, usize, usize, Vec<Slot>, Vec<Slot>, usize)> = Vec::new();
    let mut grid = Vec::new();
    let mut in_grid = false;
    for (n, l) in lines {
        if in_grid {
            grid.push(parse_slots(l, n)?);
            continue;
        }
        let parts: Vec<&str> = l.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| err(n, &format!("bad number {s:?}")));
        match parts.as_slice() {
            ["padding", p] => padding = num(p)?,
            ["fill", f] => fill = parse_fill(f, n)?,
            ["logical", f] => logical = parse_fill(f, n)?,
            ["edge", "lossless"] => edge = Edge::Lossless,
            ["edge", "lossy"] => edge = Edge::Lossy,
            ["ynw", c, r0, r1, a, b] => {
                ynws.push((num(c)?, num(r0)?, num(r1)?, parse_slots(a, n)?, parse_slots(b, n)?, n));
            }
            ["grid"] => in_grid = true,
            _ => return Err(err(n, &format!("unrecognised line {l:?}"))),
        }
    }
    let mut s = ArrayState::from_grid(grid, padding)?;
    s.fill = fill;
    s.edge = edge;
    s.logical_fill = logical;
    for (c, r0, r1, a, b, n) in ynws {
        let y = s.add_ynw(c, r0..r1, a.len(), b.len()).map_err(|e| err(n, &e.to_string()))?;
        s.ynws[y].above = a;
        s.ynws[y].below = b;
    }
    Ok(s)
}

/// One line of an operation script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    ShiftX(Direction, Rows),
    ShiftY(usize, Direction),
    Read(usize, usize),
    Write(usize, usize, bool),
    Logical(Range<usize>, usize, i64),
}

/// Parses a command script:
///
/// ```text
/// shift_x right all
/// shift_x left 0,2
/// shift_y 0 up
/// read 1 0
/// write 1 0 1
/// logical 0..4 3 -1
/// ```
pub fn parse_script(text: &str) -> Result<Vec<Command>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let n = k + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: n, msg };
        let num = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad number {s:?}")));
        let dir = |s: &str| match s {
            "left" => Ok(Direction::Left),
            "right" => Ok(Direction::Right),
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            _ => Err(err(format!("bad direction {s:?}"))),
        };
        let parts: Vec<&str> = l.split_whitespace().collect();
        let cmd = match parts.as_slice() {
            ["shift_x", d, "all"] | ["shift_x", d] => Command::ShiftX(dir(d)?, Rows::All),
            ["shift_x", d, rows] => {
                let r = rows.split(',').map(num).collect::<Result<Vec<_>>>()?;
                Command::ShiftX(dir(d)?, Rows::Subset(r))
            }
            ["shift_y", y, d] => Command::ShiftY(num(y)?, dir(d)?),
            ["read", r, p] => Command::Read(num(r)?, num(p)?),
            ["write", r, p, b] => Command::Write(
                num(r)?,
                num(p)?,
                match *b {
                    "0" => false,
                    "1" => true,
                    _ => return Err(err(format!("bad bit {b:?}"))),
                },
            ),
            ["logical", range, c, a] => {
                let (a0, a1) = range
                    .split_once("..")
                    .ok_or_else(|| err(format!("bad row range {range:?}")))?;
                let amount = a.parse::<i64>().map_err(|_| err(format!("bad amount {a:?}")))?;
                Command::Logical(num(a0)?..num(a1)?, num(c)?, amount)
            }
            _ => return Err(err(format!("unrecognised command {l:?}"))),
        };
        out.push(cmd);
    }
    Ok(out)
}

/// Result of replaying a script: the state after each command and the
/// values returned by reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub states: Vec<ArrayState>,
    pub reads: Vec<bool>,
}

pub fn replay(initial: &ArrayState, script: &[Command]) -> Result<Replay> {
    let mut s = initial.clone();
    let mut states = Vec::with_capacity(script.len());
    let mut reads = Vec::new();
    for c in script {
        s = match c {
            Command::ShiftX(d, r) => shift_x(&s, *d, r)?,
            Command::ShiftY(y, d) => shift_y(&s, *y, *d)?,
            Command::Read(r, p) => {
                reads.push(read(&s, *r, *p)?);
                s
            }
            Command::Write(r, p, b) => write(&s, *r, *p, *b)?,
            Command::Logical(rows, col, a) => logical_shift_word(&s, rows.clone(), *col, *a)?,
        };
        states.push(s.clone());
    }
    Ok(Replay { states, reads })
}
