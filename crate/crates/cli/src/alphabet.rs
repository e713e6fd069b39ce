//! Alphabet syntax accepted on the command line.
//!
//! * `1..5` is the inclusive range `{1, 2, 3, 4, 5}`.
//! * `1,2,5` is an explicit list; list items may themselves be ranges.
//! * `1+8k,6` is the progression `{1, 9, 17, 25, 33, 41}` (start, step, count).

use zaremba::Alphabet;

pub fn parse_alphabet(text: &str) -> Result<Alphabet, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty alphabet".into());
    }
    if let Some((head, count)) = text.split_once(',').filter(|(h, _)| h.ends_with('k')) {
        let (start, step) = head
            .trim_end_matches('k')
            .split_once('+')
            .ok_or_else(|| format!("bad progression `{text}`, expected start+stepk,count"))?;
        let start = number(start)?;
        let step = number(step)?;
        let count = number(count)?;
        return Alphabet::progression(start, step, count).map_err(|e| e.to_string());
    }
    let mut members = Vec::new();
    for item in text.split(',') {
        match item.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (number(lo)?, number(hi)?);
                if lo > hi {
                    return Err(format!("empty range `{item}`"));
                }
                members.extend(lo..=hi);
            }
            None => members.push(number(item)?),
        }
    }
    Alphabet::new(members).map_err(|e| e.to_string())
}

fn number(s: &str) -> Result<u64, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{}` is not a nonnegative integer", s.trim()))
}
