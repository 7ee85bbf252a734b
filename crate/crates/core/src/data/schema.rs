use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reserved label for "no event type" / "no role". Both classification
/// heads append it to their action spaces; it never appears in a schema.
pub const NONE_LABEL: &str = "None";

/// Event ontology: entity types, event types, argument roles, and the
/// per-event-type constraints on which roles an entity type may fill.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventSchema {
    pub entity_types: Vec<String>,
    pub event_types: Vec<String>,
    pub roles: Vec<String>,
    /// event type -> role -> allowed entity types. An event type with no
    /// entry is unconstrained; a listed event type allows only its listed
    /// roles, each restricted to the given entity types.
    #[serde(default)]
    pub role_constraints: HashMap<String, HashMap<String, Vec<String>>>,
}

impl EventSchema {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let schema: EventSchema = serde_json::from_str(&text)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("schema serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn validate(&self) -> Result<()> {
        fn check_unique(kind: &str, items: &[String]) -> Result<()> {
            let mut seen = HashSet::new();
            for item in items {
                if item == NONE_LABEL {
                    return Err(Error::Schema(format!("'{NONE_LABEL}' is reserved and cannot be a {kind}")));
                }
                if !seen.insert(item) {
                    return Err(Error::Schema(format!("duplicate {kind} '{item}'")));
                }
            }
            Ok(())
        }
        check_unique("entity type", &self.entity_types)?;
        check_unique("event type", &self.event_types)?;
        check_unique("role", &self.roles)?;
        for (event, roles) in &self.role_constraints {
            if !self.event_types.contains(event) {
                return Err(Error::Schema(format!("role_constraints references unknown event type '{event}'")));
            }
            for (role, allowed) in roles {
                if !self.roles.contains(role) {
                    return Err(Error::Schema(format!("role_constraints references unknown role '{role}'")));
                }
                for etype in allowed {
                    if !self.entity_types.contains(etype) {
                        return Err(Error::Schema(format!(
                            "role_constraints for '{event}/{role}' references unknown entity type '{etype}'"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn entity_type_index(&self, name: &str) -> Option<usize> {
        self.entity_types.iter().position(|t| t == name)
    }

    pub fn event_type_index(&self, name: &str) -> Option<usize> {
        self.event_types.iter().position(|t| t == name)
    }

    pub fn role_index(&self, name: &str) -> Option<usize> {
        self.roles.iter().position(|t| t == name)
    }

    /// Whether `role` may be filled by an entity of `entity_type` under
    /// `event_type`. Event types with no constraint entry allow everything.
    pub fn role_allowed(&self, event_type: &str, role: &str, entity_type: &str) -> bool {
        match self.role_constraints.get(event_type) {
            None => true,
            Some(roles) => match roles.get(role) {
                None => false,
                Some(allowed) => allowed.iter().any(|t| t == entity_type),
            },
        }
    }

    /// The 33-event ACE-style default schema. The discriminator bank sizes
    /// itself from `event_types`, so the default ships the full inventory
    /// even though a synthetic corpus exercises only part of it.
    pub fn default_ace() -> Self {
        let entity_types = ["PER", "ORG", "GPE", "LOC", "FAC", "VEH", "WEA"];
        let event_types = [
            "Be-Born",
            "Marry",
            "Divorce",
            "Injure",
            "Die",
            "Transport",
            "Transfer-Ownership",
            "Transfer-Money",
            "Start-Org",
            "Merge-Org",
            "Declare-Bankruptcy",
            "End-Org",
            "Attack",
            "Demonstrate",
            "Meet",
            "Phone-Write",
            "Start-Position",
            "End-Position",
            "Nominate",
            "Elect",
            "Arrest-Jail",
            "Release-Parole",
            "Trial-Hearing",
            "Charge-Indict",
            "Sue",
            "Convict",
            "Sentence",
            "Fine",
            "Execute",
            "Extradite",
            "Acquit",
            "Appeal",
            "Pardon",
        ];
        let roles = [
            "Attacker", "Target", "Victim", "Agent", "Entity", "Person", "Place", "Instrument",
            "Artifact", "Destination", "Origin", "Org",
        ];
        let places = ["GPE", "LOC", "FAC"];
        let agents = ["PER", "ORG", "GPE"];
        let mut role_constraints: HashMap<String, HashMap<String, Vec<String>>> = HashMap::new();
        let mut add = |event: &str, entries: &[(&str, &[&str])]| {
            let map = entries
                .iter()
                .map(|(role, allowed)| (role.to_string(), allowed.iter().map(|s| s.to_string()).collect()))
                .collect();
            role_constraints.insert(event.to_string(), map);
        };
        add(
            "Attack",
            &[
                ("Attacker", &agents),
                ("Target", &["PER", "ORG", "GPE", "LOC", "FAC", "VEH", "WEA"]),
                ("Place", &places),
                ("Instrument", &["WEA", "VEH"]),
            ],
        );
        add("Demonstrate", &[("Entity", &["PER", "ORG"]), ("Place", &places)]);
        add(
            "Die",
            &[("Victim", &["PER"]), ("Agent", &agents), ("Place", &places), ("Instrument", &["WEA", "VEH"])],
        );
        add(
            "Injure",
            &[("Victim", &["PER"]), ("Agent", &agents), ("Place", &places), ("Instrument", &["WEA", "VEH"])],
        );
        add("Meet", &[("Entity", &agents), ("Place", &places)]);
        add(
            "Transport",
            &[
                ("Agent", &agents),
                ("Artifact", &["PER", "WEA", "VEH"]),
                ("Destination", &places),
                ("Origin", &places),
            ],
        );
        add("Arrest-Jail", &[("Person", &["PER"]), ("Agent", &agents), ("Place", &places)]);
        add("End-Org", &[("Org", &["ORG"]), ("Place", &places)]);
        add("Elect", &[("Person", &["PER"]), ("Entity", &agents), ("Place", &places)]);

        let schema = EventSchema {
            entity_types: entity_types.iter().map(|s| s.to_string()).collect(),
            event_types: event_types.iter().map(|s| s.to_string()).collect(),
            roles: roles.iter().map(|s| s.to_string()).collect(),
            role_constraints,
        };
        schema.validate().expect("default schema is valid");
        schema
    }
}
