//! Built-in 5x7 bitmap glyphs for timestamp overlays.
//!
//! Keeping the font in-crate makes overlay output bit-exact across
//! platforms with no external font dependency. Coverage is limited to what
//! timestamp labels need: digits, colon, period, dash, and space.

/// Glyph height in rows.
pub const GLYPH_HEIGHT: usize = 7;
/// Glyph width in columns.
pub const GLYPH_WIDTH: usize = 5;

/// Rows of a 5-bit-wide glyph, most significant bit leftmost.
pub fn glyph(c: char) -> Option<[u8; GLYPH_HEIGHT]> {
    let rows = match c {
        '0' => [0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110],
        '1' => [0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
        '2' => [0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111],
        '3' => [0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110],
        '4' => [0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010],
        '5' => [0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110],
        '6' => [0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110],
        '7' => [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000],
        '8' => [0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110],
        '9' => [0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100],
        ':' => [0b00000, 0b00110, 0b00110, 0b00000, 0b00110, 0b00110, 0b00000],
        '.' => [0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b00110, 0b00110],
        '-' => [0b00000, 0b00000, 0b00000, 0b11111, 0b00000, 0b00000, 0b00000],
        ' ' => [0b00000; GLYPH_HEIGHT],
        _ => return None,
    };
    Some(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_and_separators_are_covered() {
        for c in "0123456789:.- ".chars() {
            assert!(glyph(c).is_some(), "missing glyph for {c:?}");
        }
        assert!(glyph('x').is_none());
    }

    #[test]
    fn glyphs_fit_five_columns() {
        for c in "0123456789:.-".chars() {
            for row in glyph(c).unwrap() {
                assert_eq!(row & !0b11111, 0);
            }
        }
    }
}
