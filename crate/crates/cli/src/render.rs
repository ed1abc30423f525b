//! Terminal colouring. Only `PHINABLA_COLOR` turns it on.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tone {
    Good,
    Bad,
}

pub fn color_enabled() -> bool {
    matches!(
        std::env::var("PHINABLA_COLOR").as_deref(),
        Ok("1") | Ok("always") | Ok("true") | Ok("yes")
    )
}

pub fn paint(s: &str, tone: Tone) -> String {
    if !color_enabled() {
        return s.to_string();
    }
    let code = match tone {
        Tone::Good => "32",
        Tone::Bad => "31",
    };
    format!("\x1b[{code}m{s}\x1b[0m")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_without_env() {
        if !color_enabled() {
            assert_eq!(paint("PURE", Tone::Good), "PURE");
        }
    }
}
