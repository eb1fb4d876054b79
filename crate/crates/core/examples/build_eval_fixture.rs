//! Writes fixtures/eval/bank.jsonl and fixtures/eval/ratings.jsonl.
//!
//! The ratings are built from per-rater counts: for each rater and rubric
//! item, a seeded random subset of questions gets the non-default answers.
//!
//!     cargo run -p mcq-core --example build_eval_fixture

use std::fs;
use std::path::PathBuf;

use mcq_core::eval::{RatingInput, RatingSet, RubricItem};
use mcq_core::iwf::{lint, IwfConfig};
use mcq_core::language::question_text;
use mcq_core::language::flesch_kincaid_grade;
use mcq_core::mcq::{bank_to_string, BankEntry, BloomLevel, GradeBand, Mcq, Provenance, QuestionStatus};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;

type Row = (BloomLevel, &'static str, Option<&'static str>, &'static str, &'static str, [&'static str; 3]);

use BloomLevel::*;

const QUESTIONS: &[Row] = &[
    (Evaluate, "evaluate when AI use helps or harms learning", Some("creative writing"),
     "Ben is considering using an AI tool to help him write a creative story. Which of the following reasons best explains when using AI might be a bad choice for his learning?",
     "It may produce a story that lacks originality and personal expression.",
     ["AI can provide quick feedback on grammar and structure.",
      "Using AI can help him brainstorm new ideas for his story.",
      "AI tools can assist in organizing his thoughts more effectively."]),
    (Remember, "define artificial intelligence", None,
     "Which description best matches what people mean by artificial intelligence?",
     "Computer systems that do tasks that normally need human thinking.",
     ["Robots that look and move exactly like real people.",
      "Websites that store large amounts of music and video.",
      "Machines that can run without any electricity."]),
    (Understand, "explain how machine learning uses examples", None,
     "How does a machine learning model get better at recognizing cats in photos?",
     "It studies many labeled pictures and adjusts itself to reduce mistakes.",
     ["A programmer types a rule for each possible cat photo.",
      "It asks a cat expert to check each new photo by hand.",
      "It copies the answers from another computer on the internet."]),
    (Understand, "describe the role of training data", None,
     "Why does the quality of training data matter for an AI model?",
     "The model learns patterns from the data, including its mistakes.",
     ["Training data decides the color of the screen the model uses.",
      "Better data makes the computer turn on more quickly.",
      "The data is deleted as soon as the model starts to run."]),
    (Apply, "recognize bias in AI systems", Some("hiring"),
     "A company trains a hiring tool on past hiring records in which most hires were men. What problem is most likely?",
     "The tool may favor men and treat women applicants unfairly.",
     ["The tool will run too slowly to review applications.",
      "The tool will refuse to read applications from anyone.",
      "The tool will pick applicants by the length of their names."]),
    (Evaluate, "judge when to trust chatbot answers", Some("science report"),
     "Maya asks a chatbot for facts for her science report. What is the best next step before she uses its answers?",
     "Compare the answers with trusted sources such as textbooks.",
     ["Copy the answers into her report right away.",
      "Ask the chatbot to write the whole report for her.",
      "Trust the answers because computers cannot make errors."]),
    (Remember, "identify sensors in smart devices", None,
     "Which part of a smart speaker lets it hear a spoken command?",
     "A microphone that turns sound into a signal.",
     ["A speaker cone that makes music louder.",
      "A light that shows when it is on.",
      "A cable that connects it to the wall."]),
    (Understand, "explain how recommendation systems work", None,
     "How does a video app decide which videos to suggest to a viewer?",
     "It looks at what the viewer watched and liked before.",
     ["It picks videos at random from the whole website.",
      "It shows the newest videos first to each viewer.",
      "It asks the viewer's friends to choose the videos."]),
    (Apply, "protect personal data online", Some("social media"),
     "A quiz app asks for your home address before showing your results. What should you do?",
     "Leave the quiz, because it has no reason to collect your address.",
     ["Enter your address so the results are more accurate.",
      "Give a friend's address instead of your own.",
      "Finish the quiz first and then share your address."]),
    (Analyze, "distinguish AI from other technology", None,
     "Which of these devices uses artificial intelligence to make a decision?",
     "A phone camera that finds faces and focuses on them.",
     ["A light switch that turns a lamp on and off.",
      "A calculator that adds two numbers you enter.",
      "A clock that rings at the same time each day."]),
    (Understand, "describe deepfakes", None,
     "What is a deepfake video that appears online?",
     "A video edited by AI to show fake events that look real.",
     ["A video that is too long to watch in one sitting.",
      "A video filmed deep under the ocean.",
      "A video that has been shared many times."]),
    (Evaluate, "evaluate fairness of face recognition", None,
     "A face recognition system works well on light skin but makes more errors on dark skin. How should this system be judged?",
     "It is unfair because its accuracy depends on a person's skin color.",
     ["It is fair because it works well for some people.",
      "It is fine because errors are part of any computer program.",
      "It is fair because the camera captures skin in high detail."]),
    (Remember, "name types of machine learning", None,
     "In supervised learning, what does the computer learn from?",
     "Examples that come with the correct answers.",
     ["Random guesses with no feedback.",
      "Instructions written by hand for each case.",
      "Sounds recorded from the room around it."]),
    (Understand, "explain what a language model does", None,
     "What does a chatbot's language model do when it writes a reply?",
     "It predicts likely next words based on patterns in text.",
     ["It searches a single book for the exact reply.",
      "It reads the user's mind to know the answer.",
      "It copies a reply that a human typed earlier."]),
    (Apply, "spot made-up answers from chatbots", Some("history homework"),
     "A chatbot gives Leo a quote from a famous scientist, but he cannot find it anywhere else. What is the most likely explanation?",
     "The tool may have invented the quote.",
     ["The scientist deleted the quote from the internet.",
      "The quote is a secret that chatbots are allowed to share.",
      "Leo's computer is blocking the real quote."]),
    (Analyze, "compare human and machine strengths", None,
     "Which task is a computer program better at than most people?",
     "Sorting a million numbers in a few seconds.",
     ["Comforting a friend who feels sad.",
      "Deciding what is fair in a school rule.",
      "Inventing a brand-new game for a party."]),
    (Evaluate, "weigh benefits and risks of AI tutors", None,
     "A school plans to give each student an AI tutor for math. Which concern is most important to discuss first?",
     "Whether the tutor gives correct help and keeps personal data safe.",
     ["Whether the tutor has a friendly cartoon face.",
      "Whether the tutor can play music during lessons.",
      "Whether the tutor speaks with a loud voice."]),
    (Understand, "explain why AI needs large amounts of data", None,
     "Why do image recognition programs need thousands of example pictures?",
     "More varied examples help them learn patterns that work on new pictures.",
     ["Extra pictures make the program look more colorful.",
      "The program deletes old pictures after each use.",
      "Thousands of files make the computer run faster."]),
    (Remember, "identify examples of AI in daily life", None,
     "Which everyday tool is an example of artificial intelligence at work?",
     "A map app that predicts traffic on your route.",
     ["A paper map folded in a car's glove box.",
      "A ruler used to measure a room's length.",
      "A flashlight powered by two batteries."]),
    (Apply, "use AI honestly for schoolwork", Some("essay writing"),
     "Priya used an AI tool to check the grammar in her essay. What is the honest way to handle this?",
     "Tell her teacher that the tool checked her grammar.",
     ["Hide the grammar help and claim the essay is her own work.",
      "Let the tool rewrite the entire essay for her.",
      "Delete the essay and submit an AI essay instead."]),
    (Understand, "explain what an algorithm is", None,
     "What is an algorithm in computer science?",
     "A set of step-by-step instructions to solve a problem.",
     ["A type of computer screen used for games.",
      "A picture that shows how a computer looks inside.",
      "A password that protects a computer."]),
    (Analyze, "identify sources of bias", Some("voice assistant"),
     "A voice assistant understands some accents better than others. What is the most likely cause?",
     "Its training recordings included few speakers with those accents.",
     ["Some accents are too loud for its microphone.",
      "It was built to ignore people from other countries.",
      "Its battery runs low when it hears accents."]),
    (Evaluate, "evaluate claims about AI", None,
     "Jordan reads that AI will soon think exactly like humans. Which response shows the best judgment?",
     "Ask for evidence, as today's AI copies patterns in data.",
     ["Believe it, because news stories are checked by robots.",
      "Believe it, because AI already has feelings.",
      "Ignore it, because AI does nothing useful."]),
    (Remember, "recall what a robot is", None,
     "Which definition best describes a robot?",
     "A machine that senses, decides, and acts in the world.",
     ["A computer game with many moving characters.",
      "A video that shows a large machine working.",
      "A toy car that has a battery inside."]),
    (Understand, "explain what personal data is", None,
     "Which item counts as personal data about a student?",
     "The student's home address and birth date.",
     ["The weather forecast for the student's town.",
      "The title of a popular movie.",
      "The rules of a board game."]),
    (Apply, "identify AI-generated images", Some("social media"),
     "Sam sees an image of a famous person doing something strange. What should Sam check first?",
     "Whether a trusted news source reports the same event.",
     ["Whether the image has many likes and shares.",
      "Whether the colors in the image look bright.",
      "Whether friends in his class think it is funny."]),
    (Analyze, "compare rule-based and learning systems", None,
     "How is a spam filter that learns from examples different from one that follows fixed rules?",
     "It can adapt to new kinds of spam over time.",
     ["It blocks spam by checking the time of day.",
      "It needs a person to read each message first.",
      "It deletes messages at random to save space."]),
    (Evaluate, "judge AI use in creative work", Some("art class"),
     "An art student wants to enter an AI-generated picture in a drawing contest. Which choice is most fair to the other students?",
     "Follow the contest rules and clearly say AI made the picture.",
     ["Submit the picture and claim it was drawn by hand.",
      "Enter it in the contest because judges are unlikely to notice.",
      "Ask a friend to enter it under a different name."]),
    (Understand, "explain computer vision", None,
     "How does a self-driving car know where the lane lines are?",
     "Cameras and software detect the lines in the road images.",
     ["The driver paints new lines on the road each day.",
      "It follows another car on the road.",
      "It guesses based on the car's speed."]),
    (Remember, "list ways apps learn from users", None,
     "Which action gives a video app information about what you like?",
     "Watching a video until the very end.",
     ["Turning down the brightness of the screen.",
      "Charging the tablet after a video ends.",
      "Cleaning the screen with a soft cloth."]),
    (Apply, "write clear prompts", None,
     "Nia wants a chatbot to explain photosynthesis for a seventh grader. Which prompt will work best?",
     "Explain photosynthesis simply for a 12-year-old.",
     ["Tell me everything about plants and photosynthesis.",
      "Write a long science paper about leaves.",
      "Explain something about nature."]),
    (Analyze, "break down the parts of an AI system", None,
     "A smart thermostat learns when a family is home. Which part of the system collects the information it learns from?",
     "Its sensors that detect movement and temperature.",
     ["The paint on the cover of the thermostat.",
      "The family's favorite TV shows and movies.",
      "The cardboard box it was shipped in."]),
    (Evaluate, "judge the accuracy of AI translations", None,
     "A translation app turns a class note into Spanish for a new student. What is the best way to make sure the meaning is right?",
     "Ask a fluent Spanish speaker to review the translation.",
     ["Trust it, since apps translate Spanish perfectly.",
      "Run the translation through the app twice.",
      "Print the note in a larger font."]),
    (Understand, "explain that AI can make mistakes", None,
     "Why can an AI system give a wrong answer even after lots of training?",
     "It can meet situations unlike the examples it learned from.",
     ["It gets tired after answering too many questions.",
      "It gives wrong answers on purpose to trick people.",
      "Its training is erased each night."]),
    (Apply, "recognize targeted ads", None,
     "After Kai searches for soccer shoes, ads for soccer gear appear on many websites. What explains this?",
     "Ad systems use his search history to guess his interests.",
     ["One shoe store owns the websites he visits.",
      "His computer randomly prefers sports ads.",
      "Soccer gear is the most popular product online."]),
    (Remember, "identify what chatbots are", None,
     "Which description fits a chatbot that students use online?",
     "A program that replies to typed messages in a conversation.",
     ["A person who answers questions in a library.",
      "A website that lists the dates of school events.",
      "A game that scores points for fast typing."]),
    (Analyze, "relate data to predictions", Some("weather"),
     "A weather app predicts rain for tomorrow. Which information is it most likely using to make this prediction?",
     "Records of past weather and current air measurements.",
     ["The weather colors you picked for the app.",
      "The number of people who opened the app today.",
      "The songs played on the radio this morning."]),
    (Evaluate, "decide on responsible AI use", Some("group project"),
     "Four classmates must finish a group report. Which use of AI best supports everyone's learning?",
     "Using AI to suggest an outline that the group then writes together.",
     ["Letting AI write the report while the group plays games.",
      "Having one person paste AI text for the whole team.",
      "Using AI to copy a report from another school."]),
    (Understand, "explain learning from rewards", None,
     "How does a game-playing AI improve by playing many rounds?",
     "It keeps the moves that led to wins and drops the others.",
     ["It memorizes the colors of the game board.",
      "It waits for the player to explain each rule.",
      "It plays the same moves in each round."]),
    (Apply, "check sources of AI information", Some("science project"),
     "Ava asks an AI tool for a fact about volcanoes for her project. Which step shows good research practice?",
     "Confirm the fact in a science book or trusted website.",
     ["Use the fact because it sounds smart.",
      "Ask the tool to make the answer longer.",
      "Share it with friends before checking it."]),
];

fn bank() -> Vec<BankEntry> {
    QUESTIONS
        .iter()
        .enumerate()
        .map(|(i, &(bloom, objective, scenario, stem, key, distractors))| {
            let mcq = Mcq {
                id: format!("q{:02}", i + 1),
                stem: stem.into(),
                key: key.into(),
                distractors: distractors.iter().map(|d| d.to_string()).collect(),
                bloom_level: bloom,
                grade_band: GradeBand::new(7, 9).unwrap(),
                learning_objective: objective.into(),
                scenario: scenario.map(str::to_string),
                status: QuestionStatus::Approved,
                revision: 0,
                provenance: Provenance { template: "generate.v1".into(), model: "gpt-4o-mini-2024-07-18".into() },
            };
            BankEntry::new(mcq, SEED)
        })
        .collect()
}

/// Per rater, how many of the 40 questions get each response. The first
/// response of each list is the default and takes the remainder.
fn plan(item: RubricItem, rater: usize) -> Vec<(&'static str, usize)> {
    use RubricItem::*;
    let others: &[(&str, usize)] = match (item, rater) {
        (Understandable, 2) => &[("no", 1)],
        (LORelated, 1 | 2) => &[("no", 1)],
        (Grammatical, 0) => &[("no", 1)],
        (Grammatical, 1) => &[("no", 2)],
        (Clear, 0) => &[("more_or_less", 1)],
        (Clear, 1) => &[("more_or_less", 3), ("no", 1)],
        (Clear, 2) => &[("more_or_less", 2), ("no", 1)],
        (Answerable, 1) => &[("no", 2)],
        (Answerable, 2) => &[("no", 1)],
        (Central, 1 | 2) => &[("no", 1)],
        (BloomsLevel, 0) => &[("no", 26)],
        (GradeLevel, 0) => &[("no", 3)],
        (GradeLevel, 1) => &[("no", 8)],
        (GradeLevel, 2) => &[("no", 2)],
        _ => &[],
    };
    let (default, others): (&str, Vec<(&str, usize)>) = match (item, rater) {
        (Rephrase, 0) => ("no", vec![("yes", 3)]),
        (Rephrase, 1) => ("no", vec![("yes", 39)]),
        (Rephrase, 2) => ("no", vec![("yes", 7)]),
        (WouldYouUseIt, 0) => ("this", vec![("rephrased", 2), ("both", 1), ("neither", 2)]),
        (WouldYouUseIt, 1) => ("this", vec![("rephrased", 20), ("both", 6), ("neither", 9)]),
        (WouldYouUseIt, 2) => ("this", vec![("rephrased", 4), ("both", 3), ("neither", 8)]),
        _ => ("yes", others.to_vec()),
    };
    let used: usize = others.iter().map(|(_, n)| n).sum();
    let mut out = vec![(default, 40 - used)];
    out.extend(others);
    out
}

/// Expands a plan into one response per question, in a seeded order.
fn assign(plan: &[(&'static str, usize)], rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    let mut responses: Vec<&str> = plan.iter().flat_map(|&(r, n)| std::iter::repeat_n(r, n)).collect();
    responses.shuffle(rng);
    responses
}

const RATERS: [&str; 3] = ["expert1", "expert2", "expert3"];
/// Questions where each rater's chosen answer matches the key.
const KEY_MATCHES: [usize; 3] = [39, 34, 34];

fn ratings(bank: &[BankEntry]) -> RatingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut set = RatingSet::new();
    for (r, rater) in RATERS.iter().enumerate() {
        let columns: Vec<(RubricItem, Vec<&str>)> = RubricItem::ALL
            .iter()
            .map(|&item| (item, assign(&plan(item, r), &mut rng)))
            .collect();
        let mut matches = vec![true; KEY_MATCHES[r]];
        matches.extend(vec![false; 40 - KEY_MATCHES[r]]);
        matches.shuffle(&mut rng);
        for (q, entry) in bank.iter().enumerate() {
            let mcq = &entry.mcq;
            let chosen = if matches[q] { mcq.key.clone() } else { mcq.distractors[q % 3].clone() };
            let input = RatingInput {
                rater_id: rater.to_string(),
                question_id: mcq.id.clone(),
                responses: columns
                    .iter()
                    .map(|(item, responses)| (item.name().to_string(), responses[q].to_string()))
                    .collect(),
                chosen_answer: chosen,
                timestamp: None,
            };
            set.insert(input.validate().expect("fixture ratings are valid"));
        }
    }
    set
}

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/eval"));
    fs::create_dir_all(&dir).expect("create fixture dir");
    let bank = bank();
    assert_eq!(bank.len(), 40);
    let config = IwfConfig::default();
    for entry in &bank {
        let report = lint(&entry.mcq, &config);
        let grade = flesch_kincaid_grade(&question_text(&entry.mcq)).unwrap();
        if report.flaw_count > 0 || grade > 10.0 {
            eprintln!("{}: grade {grade:.1} {:?}", entry.mcq.id, report.flags);
        }
    }
    fs::write(dir.join("bank.jsonl"), bank_to_string(&bank)).expect("write bank");
    let ratings: String = ratings(&bank).iter().map(|r| r.to_json_line() + "\n").collect();
    fs::write(dir.join("ratings.jsonl"), ratings).expect("write ratings");
    println!("wrote {}", dir.display());
}
