//! Prompt templates for every generation call the engine makes.
//!
//! Each template is an instruction block followed by labelled input fields and
//! an output cue. Rendering is deterministic so prompts fingerprint stably and
//! replay from cassettes.

use crate::model::{word_count, ConceptPool, RetrievedDocument};

/// A labelled input slot of a template.
#[derive(Debug, Clone, Copy)]
pub struct Field {
    pub name: &'static str,
    pub prefix: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct Template {
    pub kind: PromptKind,
    pub instructions: &'static str,
    pub inputs: &'static [Field],
    pub output_prefix: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PromptKind {
    Expand,
    Reflect,
    WriteOutline,
    PolishOutline,
    WriteSection,
    PolishArticle,
    NeedsExpansion,
    Sufficiency,
    DecomposeFacts,
    FactEquivalence,
}

impl PromptKind {
    pub const ALL: [PromptKind; 10] = [
        Self::Expand,
        Self::Reflect,
        Self::WriteOutline,
        Self::PolishOutline,
        Self::WriteSection,
        Self::PolishArticle,
        Self::NeedsExpansion,
        Self::Sufficiency,
        Self::DecomposeFacts,
        Self::FactEquivalence,
    ];

    pub fn template(self) -> &'static Template {
        match self {
            Self::Expand => &EXPAND,
            Self::Reflect => &REFLECT,
            Self::WriteOutline => &WRITE_OUTLINE,
            Self::PolishOutline => &POLISH_OUTLINE,
            Self::WriteSection => &WRITE_SECTION,
            Self::PolishArticle => &POLISH_ARTICLE,
            Self::NeedsExpansion => &NEEDS_EXPANSION,
            Self::Sufficiency => &SUFFICIENCY,
            Self::DecomposeFacts => &DECOMPOSE_FACTS,
            Self::FactEquivalence => &FACT_EQUIVALENCE,
        }
    }

    /// Recognizes which template produced `prompt`.
    pub fn detect(prompt: &str) -> Option<PromptKind> {
        let head = prompt.trim_start();
        Self::ALL
            .into_iter()
            .find(|k| head.starts_with(k.template().instructions.lines().next().unwrap_or_default()))
    }
}

impl Template {
    /// Renders the template. `values` must follow the order of `inputs`.
    pub fn render(&self, values: &[&str]) -> String {
        assert_eq!(
            values.len(),
            self.inputs.len(),
            "wrong number of values for {:?}",
            self.kind
        );
        let mut out = String::from(self.instructions);
        out.push_str("\n\n---\n\n");
        for (field, value) in self.inputs.iter().zip(values) {
            out.push_str(field.prefix);
            if !field.prefix.ends_with(char::is_whitespace) {
                out.push(' ');
            }
            out.push_str(value.trim());
            out.push_str("\n\n");
        }
        out.push_str(self.output_prefix);
        out
    }

    /// Recovers the value of input `name` from a prompt rendered by this
    /// template.
    pub fn extract<'a>(&self, prompt: &'a str, name: &str) -> Option<&'a str> {
        let idx = self.inputs.iter().position(|f| f.name == name)?;
        let body_start = prompt.find("\n\n---\n\n")? + 7;
        let mut cursor = body_start;
        for field in &self.inputs[..idx] {
            cursor += prompt[cursor..].find(field.prefix)? + field.prefix.len();
        }
        let field = &self.inputs[idx];
        let start = cursor + prompt[cursor..].find(field.prefix)? + field.prefix.len();
        let end_marker = match self.inputs.get(idx + 1) {
            Some(next) => next.prefix,
            None => self.output_prefix,
        };
        let end = start + prompt[start..].rfind(end_marker)?;
        Some(prompt[start..end].trim())
    }
}

pub const EXPAND: Template = Template {
    kind: PromptKind::Expand,
    instructions: "You are an analytical robot. I will provide you with a subject, the information I have searched about it, and our preliminary concept of it. I need you to generate a detailed, in-depth, and insightful report based on it, further exploring our initial ideas.

First, break down the subject into several broad categories, then create corresponding search engine keywords for each category.

Note: The new categories should not repeat the previous ones.

Your output format should be as follows:
-[Category 1]
--{Keyword 1}
--{Keyword 2}
-[Category 2]
--{Keyword 1}
--{Keyword 2}",
    inputs: &[
        Field { name: "info", prefix: "The information you have collected from the webpage:" },
        Field { name: "concept", prefix: "The summary of the previous concepts:" },
        Field { name: "category", prefix: "The broader categories you need to further expand:" },
    ],
    output_prefix: "Keywords:\n",
};

pub const REFLECT: Template = Template {
    kind: PromptKind::Reflect,
    instructions: "Please analyze, summarize, and evaluate the following webpage information.
Think like a person, distill the core point of each piece of information, and synthesize them into a comprehensive opinion.
Present your comprehensive opinion in the format of 1. 2. ...",
    inputs: &[Field { name: "info", prefix: "The webpage information you have collected:" }],
    output_prefix: "Concepts:\n",
};

pub const POLISH_OUTLINE: Template = Template {
    kind: PromptKind::PolishOutline,
    instructions: "Improve an outline for a report page. You already have a draft outline that covers the general information. Now you want to improve it based on the concept learned from an information-seeking to make it more informative.
Here is the format of your writing:
1. Use \"#\" Title\" to indicate section title, \"##\" Title\" to indicate subsection title, \"###\" Title\" to indicate subsubsection title, and so on.
2. Do not include other information.
3. Do not include topic name itself in the outline.",
    inputs: &[
        Field { name: "draft", prefix: "Current outline:\n " },
        Field { name: "concepts", prefix: "The information you learned from the conversation:\n" },
    ],
    output_prefix: "Write the page outline:\n",
};

pub const WRITE_OUTLINE: Template = Template {
    kind: PromptKind::WriteOutline,
    instructions: "Write an outline for a report page.
Here is the format of your writing:
1. Use \"#\" Title\" to indicate section title, \"##\" Title\" to indicate subsection title, \"###\" Title\" to indicate subsubsection title, and so on.
2. Do not include other information.
3. Do not include topic name itself in the outline.",
    inputs: &[Field { name: "topic", prefix: "The topic you want to write: " }],
    output_prefix: "Write the report page outline:\n",
};

pub const WRITE_SECTION: Template = Template {
    kind: PromptKind::WriteSection,
    instructions: "Write a Wikipedia section based on the collected information.

Here is the format of your writing:
    1. Use \"#\" Title\" to indicate section title, \"##\" Title\" to indicate subsection title, \"###\" Title\" to indicate subsubsection title, and so on.
    2. Use [1], [2], ..., [n] in line (for example, \"The capital of the United States is Washington, D.C.[1][3].\"). You DO NOT need to include a References or Sources section to list the sources at the end.
    3. The language style should resemble that of Wikipedia: concise yet informative, formal yet accessible.",
    inputs: &[
        Field { name: "info", prefix: "The Collected information:\n" },
        Field { name: "topic", prefix: "The topic of the page: " },
        Field { name: "section", prefix: "The section you need to write: " },
    ],
    output_prefix: "Write the section with proper inline citations (Start your writing with # section title. Don't include the page title or try to write other sections):\n",
};

pub const POLISH_ARTICLE: Template = Template {
    kind: PromptKind::PolishArticle,
    instructions: "You are a faithful text editor that is good at finding repeated information in the article and deleting them to make sure there is no repetition in the article.
You won't delete any non-repeated part in the article.
You will keep the inline citations and article structure (indicated by \"#\", \"##\", etc.) appropriately.
Refine the statement to avoid vague and ambiguous expressions, making it more concise and clear.
Do your job for the following article.",
    inputs: &[Field { name: "article", prefix: "The article you need to polish:\n" }],
    output_prefix: "Your revised article:\n",
};

pub const NEEDS_EXPANSION: Template = Template {
    kind: PromptKind::NeedsExpansion,
    instructions: "Decide whether a research node should be expanded into narrower sub-categories with new web searches.
Answer \"yes\" when its material leaves important aspects unexplored beyond what the concept summary already covers, and \"no\" when it is already exhausted.
Reply with a single word: yes or no.",
    inputs: &[
        Field { name: "category", prefix: "The category under consideration:" },
        Field { name: "info", prefix: "The information collected for it:" },
        Field { name: "concept", prefix: "The summary of the current concepts:" },
    ],
    output_prefix: "Answer:",
};

pub const SUFFICIENCY: Template = Template {
    kind: PromptKind::Sufficiency,
    instructions:
        "Decide whether enough information has been gathered to write a thorough, well-cited article on the topic.
Reply with a single word: sufficient or insufficient.",
    inputs: &[
        Field {
            name: "topic",
            prefix: "The topic:",
        },
        Field {
            name: "concept",
            prefix: "The summary of the current concepts:",
        },
    ],
    output_prefix: "Answer:",
};

pub const DECOMPOSE_FACTS: Template = Template {
    kind: PromptKind::DecomposeFacts,
    instructions: "Break the following text into atomic facts.
Each atomic fact is one short declarative sentence stating exactly one piece of information, understandable on its own.
Write one fact per line with no numbering, bullets or commentary.",
    inputs: &[Field {
        name: "text",
        prefix: "Text:\n",
    }],
    output_prefix: "Atomic facts:\n",
};

pub const FACT_EQUIVALENCE: Template = Template {
    kind: PromptKind::FactEquivalence,
    instructions: "You are given a numbered list of known facts and one candidate fact.
If the candidate states the same information as one of the known facts, reply with that fact's number.
Otherwise reply with the word none.",
    inputs: &[
        Field {
            name: "known",
            prefix: "Known facts:\n",
        },
        Field {
            name: "candidate",
            prefix: "Candidate fact:",
        },
    ],
    output_prefix: "Answer:",
};

/// Documents formatted as a numbered list: `[n] title` followed by content.
pub fn format_documents<'a>(docs: impl IntoIterator<Item = &'a RetrievedDocument>) -> String {
    let mut out = Vec::new();
    for (i, d) in docs.into_iter().enumerate() {
        out.push(format!("[{}] {}\n{}", i + 1, d.title.trim(), d.content.trim()));
    }
    if out.is_empty() {
        "(none)".to_string()
    } else {
        out.join("\n\n")
    }
}

/// Concept pool as a numbered list, most recent insights first, cut at
/// `word_budget` words. The cut never splits an insight.
pub fn format_concepts(pool: &ConceptPool, word_budget: usize) -> String {
    let mut ordered: Vec<_> = pool.insights.iter().collect();
    ordered.sort_by(|a, b| {
        b.created_at_revision
            .cmp(&a.created_at_revision)
            .then(a.insight_id.cmp(&b.insight_id))
    });
    let mut used = 0;
    let mut lines = Vec::new();
    for ins in ordered {
        let words = word_count(&ins.text);
        if used + words > word_budget && !lines.is_empty() {
            break;
        }
        used += words;
        lines.push(format!("{}. {}", lines.len() + 1, ins.text.trim()));
        if used >= word_budget {
            break;
        }
    }
    if lines.is_empty() {
        "(none)".to_string()
    } else {
        lines.join("\n")
    }
}
