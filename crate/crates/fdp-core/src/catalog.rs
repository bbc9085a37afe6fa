//! Catalog of the indicator features the pipeline knows about.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("duplicate feature code {0:?} in catalog")]
    DuplicateCode(String),
}

/// Broad grouping a feature belongs to. The financial-statement groups
/// (`Solvency` through `Expansion`) make up the traditional financial
/// indicator system; the rest come from governance data, audited reports,
/// the external market, and online public opinion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureCategory {
    Solvency,
    Development,
    StructuralRatio,
    Profitability,
    Operating,
    Expansion,
    Governance,
    Audit,
    EarningsMgmt,
    Macroeconomic,
    PublicMarket,
    Opinion,
}

impl FeatureCategory {
    /// True for the six financial-statement categories.
    pub fn is_financial(self) -> bool {
        matches!(
            self,
            Self::Solvency
                | Self::Development
                | Self::StructuralRatio
                | Self::Profitability
                | Self::Operating
                | Self::Expansion
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Solvency => "solvency",
            Self::Development => "development",
            Self::StructuralRatio => "structural_ratio",
            Self::Profitability => "profitability",
            Self::Operating => "operating",
            Self::Expansion => "expansion",
            Self::Governance => "governance",
            Self::Audit => "audit",
            Self::EarningsMgmt => "earnings_mgmt",
            Self::Macroeconomic => "macroeconomic",
            Self::PublicMarket => "public_market",
            Self::Opinion => "opinion",
        }
    }
}

impl fmt::Display for FeatureCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub code: String,
    pub category: FeatureCategory,
    pub description: String,
}

/// Registry of feature codes with their category and a short description.
#[derive(Debug, Clone)]
pub struct FeatureCatalog {
    entries: Vec<CatalogEntry>,
}

impl FeatureCatalog {
    pub fn new(entries: Vec<CatalogEntry>) -> Result<Self, CatalogError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.code.clone()) {
                return Err(CatalogError::DuplicateCode(e.code.clone()));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, code: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.code == code)
    }

    pub fn contains(&self, code: &str) -> bool {
        self.get(code).is_some()
    }
}

impl Default for FeatureCatalog {
    /// The shipped 43-feature multi-source catalog: 28 financial ratios
    /// (F1-F28), governance (GVN), audit opinion (Audittyp), accrual
    /// earnings management (DAP), 9 macroeconomic series (E1-E9), 2 public
    /// market figures (M1-M2), and the opinion score (emotion).
    fn default() -> Self {
        use FeatureCategory::*;
        let raw: &[(&str, FeatureCategory, &str)] = &[
            ("F1", Solvency, "Current ratio"),
            ("F2", Solvency, "Quick ratio"),
            ("F3", Solvency, "Cash ratio"),
            ("F4", Solvency, "Operating cash flow to current liabilities"),
            ("F5", Solvency, "Gearing ratio"),
            ("F6", Solvency, "Interest coverage multiple"),
            ("F7", Development, "Total assets growth rate"),
            ("F8", Development, "Net profit growth rate"),
            ("F9", Development, "Operating income growth rate"),
            ("F10", StructuralRatio, "Current asset ratio"),
            ("F11", StructuralRatio, "Fixed asset ratio"),
            ("F12", StructuralRatio, "Shareholders' equity to fixed assets"),
            ("F13", StructuralRatio, "Current liability ratio"),
            ("F14", Profitability, "Net profit margin of total assets"),
            ("F15", Profitability, "Net profit margin of current assets"),
            ("F16", Profitability, "Net profit rate of fixed assets"),
            ("F17", Profitability, "Operating cost ratio"),
            ("F18", Profitability, "Operating profit margin"),
            ("F19", Profitability, "Return on net assets"),
            ("F20", Operating, "Accounts payable turnover"),
            ("F21", Operating, "Receivables turnover"),
            ("F22", Operating, "Inventory turnover"),
            ("F23", Operating, "Fixed assets turnover"),
            ("F24", Operating, "Total assets turnover"),
            ("F25", Expansion, "Earnings per share"),
            ("F26", Expansion, "Net assets per share"),
            ("F27", Expansion, "Capital surplus per share"),
            ("F28", Expansion, "Net cash flow per share"),
            ("GVN", Governance, "Independent directors over board size"),
            ("Audittyp", Audit, "Audit opinion flag"),
            ("DAP", EarningsMgmt, "Accrual earnings management"),
            ("E1", Macroeconomic, "Retail sales of consumer goods growth rate"),
            ("E2", Macroeconomic, "GDP growth rate"),
            ("E3", Macroeconomic, "M1 money supply growth rate"),
            ("E4", Macroeconomic, "M2 money supply growth rate"),
            ("E5", Macroeconomic, "CPI growth rate"),
            ("E6", Macroeconomic, "RPI growth rate"),
            ("E7", Macroeconomic, "Unemployment rate"),
            ("E8", Macroeconomic, "Import and export total growth rate"),
            ("E9", Macroeconomic, "Exchange rate"),
            ("M1", PublicMarket, "Total market capitalization"),
            ("M2", PublicMarket, "A-shares over total share capital"),
            ("emotion", Opinion, "Influence-weighted public opinion score"),
        ];
        let entries = raw
            .iter()
            .map(|(code, category, description)| CatalogEntry {
                code: (*code).to_string(),
                category: *category,
                description: (*description).to_string(),
            })
            .collect();
        Self::new(entries).expect("default catalog codes are unique")
    }
}
