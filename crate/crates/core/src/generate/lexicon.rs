//! Candidate values and seed tasks for rule generation.

use serde::{Deserialize, Serialize};

use crate::rule::Language;

/// Pools the sampler draws string values and patterns from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicon {
    #[serde(default)]
    pub words: Vec<String>,
    #[serde(default)]
    pub phrases: Vec<String>,
    #[serde(default)]
    pub characters: Vec<String>,
    #[serde(default)]
    pub letters: Vec<String>,
    #[serde(default)]
    pub punctuation: Vec<String>,
    #[serde(default)]
    pub patterns: Vec<String>,
}

fn owned(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

const EN_WORDS: &[&str] = &[
    "the", "and", "light", "river", "future", "data", "ocean", "garden", "energy", "city", "music", "dream",
    "science", "history", "simple", "bright", "quiet", "journey", "winter", "summer", "friend", "idea",
    "change", "world", "morning", "story", "window", "forest", "silver", "balance",
];

const EN_PHRASES: &[&str] = &[
    "In conclusion", "For example", "First of all", "The key point", "Once upon a time", "In summary",
    "As a result", "On the other hand", "To begin with", "Thank you", "Dear reader", "Note that",
];

const EN_LETTERS: &[&str] = &[
    "a", "b", "c", "d", "e", "f", "g", "h", "i", "k", "m", "n", "o", "p", "r", "s", "t", "u", "w", "y", "A",
    "E", "I", "O", "S", "T",
];

const EN_PUNCTUATION: &[&str] = &[".", ",", "!", "?", ";", ":", "\"", "'", "(", ")", "-"];

const EN_PATTERNS: &[&str] = &[
    r"\d+", r"[A-Z][a-z]+", r"\b\w+ing\b", r"\b\w{8,}\b", r"\b(?:the|The)\b", r"[aeiou]{2}", r"\w+ly\b",
    r"#\w+",
];

const ZH_WORDS: &[&str] = &[
    "春天", "未来", "科技", "朋友", "城市", "音乐", "梦想", "历史", "自然", "阳光", "河流", "希望", "生活",
    "学习", "时间", "故乡", "月亮", "世界", "教育", "健康",
];

const ZH_PHRASES: &[&str] = &[
    "总而言之", "首先", "例如", "综上所述", "从前", "值得注意的是", "另一方面", "因此", "感谢阅读", "亲爱的读者",
];

const ZH_CHARACTERS: &[&str] = &[
    "的", "我", "你", "他", "是", "在", "有", "人", "大", "中", "天", "山", "水", "花", "月", "风", "心", "书",
    "光", "春",
];

const ZH_PUNCTUATION: &[&str] = &["。", "，", "！", "？", "；", "：", "、", "“", "”", "《", "》", "…"];

const ZH_PATTERNS: &[&str] = &[r"\d+", r"[A-Za-z]+", r"[春夏秋冬]", r"《[^》]+》", r"[山水]", r"“[^”]*”"];

const EN_SEED_TASKS: &[&str] = &[
    "Write a short story about a lighthouse keeper who finds a message in a bottle.",
    "Explain how photosynthesis works to a ten-year-old.",
    "Write a product description for a reusable water bottle.",
    "Describe your ideal weekend in a small coastal town.",
    "Write a letter to a friend recommending a book you enjoyed.",
    "Summarize the benefits of regular exercise.",
    "Give advice to a student preparing for their first job interview.",
    "Write a poem about the changing seasons.",
    "Explain the difference between weather and climate.",
    "Describe the history and cultural significance of tea.",
    "Write a travel guide entry for a city you would like to visit.",
    "Argue for or against a four-day work week.",
    "Write a review of an imaginary restaurant.",
    "Explain how a computer stores information.",
    "Describe a memorable teacher and what they taught you.",
    "Write instructions for planting a vegetable garden.",
    "Compose a speech for a school graduation ceremony.",
    "Explain why sleep is important for learning.",
    "Write a dialogue between a robot and a child.",
    "Describe the life cycle of a butterfly.",
];

const ZH_SEED_TASKS: &[&str] = &[
    "写一篇关于家乡春天的短文。",
    "向小学生解释为什么天空是蓝色的。",
    "为一款智能手表写一段产品介绍。",
    "描述你理想中的周末生活。",
    "给朋友写一封信，推荐一本你喜欢的书。",
    "总结坚持锻炼身体的好处。",
    "为即将参加面试的大学生提供建议。",
    "写一首关于月亮的现代诗。",
    "解释天气和气候的区别。",
    "介绍中国茶文化的历史。",
    "为一座你想去的城市写一段旅游攻略。",
    "谈谈你对远程办公的看法。",
    "写一段虚构餐厅的点评。",
    "解释计算机是如何存储信息的。",
    "描述一位让你难忘的老师。",
    "写一份在阳台种植蔬菜的指南。",
    "为毕业典礼写一篇演讲稿。",
    "说明充足睡眠对学习的重要性。",
    "写一段机器人和孩子之间的对话。",
    "描述蝴蝶的一生。",
];

impl Lexicon {
    pub fn default_for(language: Language) -> Lexicon {
        match language {
            Language::En => Lexicon {
                words: owned(EN_WORDS),
                phrases: owned(EN_PHRASES),
                characters: Vec::new(),
                letters: owned(EN_LETTERS),
                punctuation: owned(EN_PUNCTUATION),
                patterns: owned(EN_PATTERNS),
            },
            Language::Zh => Lexicon {
                words: owned(ZH_WORDS),
                phrases: owned(ZH_PHRASES),
                characters: owned(ZH_CHARACTERS),
                letters: Vec::new(),
                punctuation: owned(ZH_PUNCTUATION),
                patterns: owned(ZH_PATTERNS),
            },
        }
    }
}

pub fn default_seed_tasks(language: Language) -> Vec<String> {
    match language {
        Language::En => owned(EN_SEED_TASKS),
        Language::Zh => owned(ZH_SEED_TASKS),
    }
}
