//! Records fixtures/replay/transcript.jsonl for the five requests in
//! fixtures/replay/objectives.jsonl, using a scripted stand-in for the model.
//!
//! Each request has a list of drafts. The first answers the generation
//! prompt; each revision prompt is answered with the draft after the one it
//! embeds. Outcomes: approved at once, approved after one revision (flaws),
//! approved after one revision (reading level), approved after two, and
//! sent to human review after three.
//!
//!     cargo run -p mcq-core --example build_replay_fixture

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use mcq_core::gateway::{CompletionRequest, FnProvider, Gateway, ProviderError, Transcript};
use mcq_core::generator::{GENERATE_PROMPT_ID, REVISE_PROMPT_ID};
use mcq_core::mcq::{BloomLevel, GenerationRequest, GradeBand};
use mcq_core::supervisor::{Supervisor, SupervisorConfig, WorkflowStatus};
use serde_json::{json, Value};

struct Script {
    objective: &'static str,
    bloom: BloomLevel,
    scenario: Option<&'static str>,
    drafts: Vec<Value>,
}

fn draft(stem: &str, key: &str, distractors: [&str; 3]) -> Value {
    json!({"stem": stem, "key": key, "distractors": distractors})
}

fn scripts() -> Vec<Script> {
    let privacy = "A family puts a smart speaker in the living room. Which concern about privacy is most important for them to think about?";
    let everyday = "Which of these everyday tools uses artificial intelligence?";
    vec![
        Script {
            objective: "explain how recommendation systems use listening history",
            bloom: BloomLevel::Understand,
            scenario: None,
            drafts: vec![draft(
                "A music app suggests new songs to Lena after she listens for a week. What does the app most likely use to pick the songs?",
                "The songs Lena played, skipped, and liked recently.",
                [
                    "The weather in the city where Lena lives.",
                    "The price of the phone that Lena owns.",
                    "The number of songs stored on other phones.",
                ],
            )],
        },
        Script {
            objective: "recognize bias in training data",
            bloom: BloomLevel::Analyze,
            scenario: Some("face recognition"),
            drafts: vec![
                draft(
                    "A face recognition app was trained mostly on photos of adults. Which problem is most likely when it is used on children?",
                    "It may make more mistakes on children's faces.",
                    [
                        "It will always refuse to open on a child's phone.",
                        "It will make photos of children look older.",
                        "All of the above",
                    ],
                ),
                draft(
                    "A face recognition app was trained mostly on photos of adults. Which problem is most likely when it is used on children?",
                    "It may make more errors on the faces of children.",
                    [
                        "It will refuse to open on a child's phone.",
                        "It will make photos of children look older.",
                        "It will use more battery when children use it.",
                    ],
                ),
            ],
        },
        Script {
            objective: "describe how chatbots generate text",
            bloom: BloomLevel::Understand,
            scenario: None,
            drafts: vec![
                draft(
                    "Considering the computational methodology underlying contemporary conversational artificial intelligence applications, which characterization most accurately describes the mechanism responsible for generating individual responses?",
                    "Probabilistic prediction of subsequent linguistic tokens based on statistical regularities.",
                    [
                        "Retrieval of predetermined responses authored individually by administrators.",
                        "Consultation of comprehensive encyclopedic databases containing verified information.",
                        "Interpretation of emotional indicators communicated through keyboard interactions.",
                    ],
                ),
                draft(
                    "How does a chatbot create its reply to a question?",
                    "It predicts likely next words from patterns it learned.",
                    [
                        "It copies a reply written by a person ahead of time.",
                        "It looks up the reply in one printed book.",
                        "It guesses how the user feels from their typing speed.",
                    ],
                ),
            ],
        },
        Script {
            objective: "evaluate privacy risks of smart devices",
            bloom: BloomLevel::Evaluate,
            scenario: Some("smart speaker"),
            drafts: vec![
                draft(
                    privacy,
                    "It may record private talks in the home.",
                    ["It will never play music loud enough.", "It may need a new battery each year.", "None of the above"],
                ),
                draft(
                    privacy,
                    "It may save private talks on a company server.",
                    ["It will often play music too loud.", "It may need a new battery each year.", "All of the above"],
                ),
                draft(
                    privacy,
                    "It may record private talks and store them online.",
                    [
                        "It may play music louder than the family wants.",
                        "It may need a new battery each year.",
                        "It may take up space on a shelf.",
                    ],
                ),
            ],
        },
        Script {
            objective: "identify examples of AI in everyday life",
            bloom: BloomLevel::Remember,
            scenario: None,
            drafts: vec![
                draft(
                    everyday,
                    "A phone that unlocks when it sees your face.",
                    ["A toaster that is always set to medium.", "A pencil sharpener with a crank.", "All of the above"],
                ),
                draft(
                    everyday,
                    "A phone that unlocks by recognizing your face.",
                    ["A toaster that never burns bread.", "A pencil sharpener with a crank.", "None of the above"],
                ),
                draft(
                    everyday,
                    "A phone that recognizes your face to unlock.",
                    ["A toaster that often burns bread.", "A pencil sharpener with a crank.", "All of the above"],
                ),
                draft(
                    everyday,
                    "A phone that uses face recognition to unlock.",
                    ["A toaster that always burns bread.", "A pencil sharpener that never jams.", "All of the above"],
                ),
            ],
        },
    ]
}

fn respond(scripts: &[Script], request: &CompletionRequest, prompt: &str) -> Result<String, ProviderError> {
    let script = scripts
        .iter()
        .find(|s| prompt.contains(s.objective))
        .ok_or_else(|| ProviderError::Rejected("no script for this objective".into()))?;
    let next = match request.prompt_id.as_str() {
        GENERATE_PROMPT_ID => 0,
        REVISE_PROMPT_ID => {
            let current = script
                .drafts
                .iter()
                .position(|d| prompt.contains(d["key"].as_str().unwrap()))
                .ok_or_else(|| ProviderError::Rejected("revision of an unknown draft".into()))?;
            current + 1
        }
        other => return Err(ProviderError::Rejected(format!("unexpected prompt {other}"))),
    };
    let payload = script
        .drafts
        .get(next)
        .or(script.drafts.last())
        .expect("scripts are nonempty");
    Ok(payload.to_string())
}

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/replay"));
    fs::create_dir_all(&dir).expect("create fixture dir");
    let band = GradeBand::new(7, 9).unwrap();
    let requests: Vec<GenerationRequest> = scripts()
        .iter()
        .map(|s| {
            let r = GenerationRequest::new(s.objective, s.bloom, band);
            match s.scenario {
                Some(sc) => r.with_scenario(sc),
                None => r,
            }
        })
        .collect();
    let objectives: String = scripts()
        .iter()
        .map(|s| {
            let mut line = json!({"learning_objective": s.objective, "bloom_level": s.bloom});
            if let Some(sc) = s.scenario {
                line["scenario"] = json!(sc);
            }
            line.to_string() + "\n"
        })
        .collect();

    let table = scripts();
    let provider = Arc::new(FnProvider(move |req: &CompletionRequest, prompt: &str| respond(&table, req, prompt)));
    let gateway = Gateway::record(provider, Transcript::new());
    let config = SupervisorConfig { workers: 1, ..SupervisorConfig::default() };
    let outcome = Supervisor::new(&gateway, config).run_batch(&requests);
    assert!(outcome.errors.is_empty(), "{:?}", outcome.errors);
    let summary: Vec<(WorkflowStatus, u32)> = outcome.states.iter().map(|s| (s.status, s.revisions_used)).collect();
    assert_eq!(
        summary,
        vec![
            (WorkflowStatus::Approved, 0),
            (WorkflowStatus::Approved, 1),
            (WorkflowStatus::Approved, 1),
            (WorkflowStatus::Approved, 2),
            (WorkflowStatus::NeedsHumanReview, 3),
        ],
        "{}",
        outcome.report.to_json()
    );

    fs::write(dir.join("objectives.jsonl"), objectives).expect("write objectives");
    gateway.transcript().save(dir.join("transcript.jsonl")).expect("write transcript");
    println!("wrote {} ({} transcript entries)", dir.display(), gateway.transcript().len());
}
