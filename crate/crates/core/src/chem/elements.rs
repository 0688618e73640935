use std::fmt;

/// Atomic number newtype. `Element(0)` is reserved for the SMARTS wildcard
/// and never appears on a parsed molecule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(pub u8);

struct ElementData {
    number: u8,
    symbol: &'static str,
    weight: f64,
}

// Standard atomic weights (IUPAC abridged, g/mol).
const TABLE: &[ElementData] = &[
    ElementData { number: 1, symbol: "H", weight: 1.008 },
    ElementData { number: 2, symbol: "He", weight: 4.0026 },
    ElementData { number: 3, symbol: "Li", weight: 6.94 },
    ElementData { number: 4, symbol: "Be", weight: 9.0122 },
    ElementData { number: 5, symbol: "B", weight: 10.81 },
    ElementData { number: 6, symbol: "C", weight: 12.011 },
    ElementData { number: 7, symbol: "N", weight: 14.007 },
    ElementData { number: 8, symbol: "O", weight: 15.999 },
    ElementData { number: 9, symbol: "F", weight: 18.998 },
    ElementData { number: 10, symbol: "Ne", weight: 20.180 },
    ElementData { number: 11, symbol: "Na", weight: 22.990 },
    ElementData { number: 12, symbol: "Mg", weight: 24.305 },
    ElementData { number: 13, symbol: "Al", weight: 26.982 },
    ElementData { number: 14, symbol: "Si", weight: 28.085 },
    ElementData { number: 15, symbol: "P", weight: 30.974 },
    ElementData { number: 16, symbol: "S", weight: 32.06 },
    ElementData { number: 17, symbol: "Cl", weight: 35.45 },
    ElementData { number: 18, symbol: "Ar", weight: 39.948 },
    ElementData { number: 19, symbol: "K", weight: 39.098 },
    ElementData { number: 20, symbol: "Ca", weight: 40.078 },
    ElementData { number: 22, symbol: "Ti", weight: 47.867 },
    ElementData { number: 24, symbol: "Cr", weight: 51.996 },
    ElementData { number: 25, symbol: "Mn", weight: 54.938 },
    ElementData { number: 26, symbol: "Fe", weight: 55.845 },
    ElementData { number: 27, symbol: "Co", weight: 58.933 },
    ElementData { number: 28, symbol: "Ni", weight: 58.693 },
    ElementData { number: 29, symbol: "Cu", weight: 63.546 },
    ElementData { number: 30, symbol: "Zn", weight: 65.38 },
    ElementData { number: 33, symbol: "As", weight: 74.922 },
    ElementData { number: 34, symbol: "Se", weight: 78.971 },
    ElementData { number: 35, symbol: "Br", weight: 79.904 },
    ElementData { number: 37, symbol: "Rb", weight: 85.468 },
    ElementData { number: 40, symbol: "Zr", weight: 91.224 },
    ElementData { number: 46, symbol: "Pd", weight: 106.42 },
    ElementData { number: 47, symbol: "Ag", weight: 107.87 },
    ElementData { number: 50, symbol: "Sn", weight: 118.71 },
    ElementData { number: 53, symbol: "I", weight: 126.90 },
    ElementData { number: 55, symbol: "Cs", weight: 132.91 },
    ElementData { number: 78, symbol: "Pt", weight: 195.08 },
    ElementData { number: 79, symbol: "Au", weight: 196.97 },
    ElementData { number: 80, symbol: "Hg", weight: 200.59 },
];

pub const HYDROGEN_WEIGHT: f64 = 1.008;

impl Element {
    pub const WILDCARD: Element = Element(0);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        TABLE
            .iter()
            .find(|e| e.symbol == symbol)
            .map(|e| Element(e.number))
    }

    pub fn from_number(number: u8) -> Option<Element> {
        TABLE
            .iter()
            .find(|e| e.number == number)
            .map(|e| Element(e.number))
    }

    fn data(self) -> Option<&'static ElementData> {
        TABLE.iter().find(|e| e.number == self.0)
    }

    pub fn symbol(self) -> &'static str {
        if self == Element::WILDCARD {
            return "*";
        }
        self.data().map(|d| d.symbol).unwrap_or("?")
    }

    pub fn atomic_weight(self) -> f64 {
        self.data().map(|d| d.weight).unwrap_or(0.0)
    }

    /// Members of the SMILES organic subset may be written without brackets.
    pub fn is_organic_subset(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
    }

    /// Elements that may be written as lowercase aromatic symbols.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34)
    }

    /// Allowed valences after charge adjustment, smallest first. `None` means
    /// the element is outside the checked set and valence is not enforced.
    pub fn allowed_valences(self, charge: i8) -> Option<&'static [u8]> {
        let v: &'static [u8] = match (self.0, charge) {
            (5, 0) => &[3],
            (5, -1) => &[4],
            (5, 1) => &[2],
            (6, 0) => &[4],
            (6, 1) | (6, -1) => &[3],
            (7, 0) => &[3, 5],
            (7, 1) => &[4],
            (7, -1) => &[2],
            (8, 0) => &[2],
            (8, 1) => &[3],
            (8, -1) => &[1],
            (15, 0) => &[3, 5],
            (15, 1) => &[4],
            (15, -1) => &[2, 4],
            (16, 0) => &[2, 4, 6],
            (16, 1) => &[3, 5],
            (16, -1) => &[1, 3, 5],
            (9, 0) => &[1],
            (17, 0) | (35, 0) | (53, 0) => &[1, 3, 5, 7],
            (9, -1) | (17, -1) | (35, -1) | (53, -1) => &[0],
            (1, 0) => &[1],
            _ => return None,
        };
        Some(v)
    }

    /// Implicit hydrogen count for an organic-subset atom given the valence
    /// already used by explicit bonds. Returns `None` when no allowed valence
    /// can accommodate `used`.
    pub fn implicit_hydrogens(self, charge: i8, used: u8) -> Option<u8> {
        match self.allowed_valences(charge) {
            // Organic-subset halogens only take their lowest valence here.
            Some(vals) if matches!(self.0, 17 | 35 | 53) && charge == 0 => {
                if used <= vals[0] {
                    Some(vals[0] - used)
                } else {
                    vals.iter().find(|&&v| v >= used).map(|_| 0)
                }
            }
            Some(vals) => vals.iter().find(|&&v| v >= used).map(|&v| v - used),
            None => Some(0),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}
