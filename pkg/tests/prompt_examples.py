"""In-context examples of the packaged prompts, reused as canned model outputs."""

from __future__ import annotations

TESLA_ANSWER = (
    "Tesla Bot, also known as Optimus, is a humanoid robot developed by Tesla Inc. It is designed to "
    "perform repetitive or unsafe tasks, leveraging Tesla's advancements in AI and robotics. Standing "
    "approximately 5'8\" tall and weighing around 125 pounds, Optimus features human-like proportions and a "
    "sleek design. It uses Tesla's AI technology, including computer vision and self-learning algorithms, to "
    "navigate and interact with its environment. The bot is envisioned as a tool to enhance productivity and "
    "safety in industrial, household, and other labor-intensive settings."
)

TESLA_POINTS = [
    "Tesla Bot is a humanoid robot developed by Tesla Inc.",
    "Tesla Bot is also known as Optimus.",
    "Tesla Bot is designed to perform repetitive or unsafe tasks in industrial, household, and other "
    "labor-intensive settings.",
    "Tesla Bot is approximately 5'8\" tall and weighs around 125 pounds, with human-like proportions and a "
    "sleek design.",
    "Tesla Bot uses AI technology to navigate and interact with its environment.",
]

# the model's literal reply: a bracketed list with an unescaped 5'8" inside
TESLA_REPLY = "[\n" + ",\n".join(f'"{p}"' for p in TESLA_POINTS) + "\n]"

LEGION = (
    "Lenovo is a market leader in PCs, offering popular ThinkPad and Yoga series laptops, alongside "
    "gaming-focused Legion products."
)
LENOVO_ANSWER = (
    "Lenovo is a global technology company headquartered in Beijing, China, and Morrisville, North "
    "Carolina, USA. Founded in 1984, it is renowned for designing, manufacturing, and selling computers, "
    f"smartphones, servers, and other technology products. {LEGION} {LEGION}"
)
LENOVO_LEGION_POINT = (
    "Lenovo is a PC market leader, known for ThinkPad and Yoga laptops, as well as gaming-focused Legion products."
)
LENOVO_POINTS = [
    "Lenovo is a global technology company with headquarters in Beijing, China, and Morrisville, North "
    "Carolina, USA.",
    "Founded in 1984, Lenovo specializes in designing, manufacturing, and selling computers, smartphones, "
    "servers, and other tech products.",
    LENOVO_LEGION_POINT,
    LENOVO_LEGION_POINT,
]
LENOVO_REPLY = "[\n" + ",\n".join(f'"{p}"' for p in LENOVO_POINTS) + "\n]"

# matching examples: (reference keypoint, candidate list, expected index)
MATCH_LENOVO = (
    "Lenovo is a global technology company with headquarters in different countries.",
    LENOVO_POINTS,
    0,
)
MATCH_TESLA = ("The alias of Tesla Bot is Optimus.", TESLA_POINTS, 1)
MATCH_PCIE = (
    "PCIe bifurcation allows a single PCIe slot to be divided into multiple lanes.",
    [
        "Flexible Leasing Options: Offers a variety of leasing solutions, including wet lease, dry lease, and "
        "lease-purchase agreements tailored to meet airline requirements.",
        "Comprehensive Fleet Management: Provides access to a wide range of aircraft models, ensuring "
        "compatibility with operational needs and passenger demands.",
        "Cost-Effective Solutions: Reduces the financial burden of aircraft ownership through competitive lease "
        "terms and efficient asset utilization.",
        "Global Network: Connects airlines with a diverse pool of lessors and aircraft owners across the world.",
    ],
    -1,
)
MATCH_EXAMPLES = (MATCH_LENOVO, MATCH_TESLA, MATCH_PCIE)

# scoring examples: (keypoint 1, keypoint 2, raw score)
SCORE_EXAMPLES = (
    (
        "The Gemini model supports over 2 billion monthly users across products like Search, Google Cloud, "
        "YouTube, and Google Maps, with API calls increasing 14x in six months.",
        "Sundar Pichai mentions that Gemini is now available on GitHub Copilot, with over 2 billion monthly "
        "users across all seven products.",
        7,
    ),
    (
        "Google Cloud revenue increased 35% YoY to $11.4 billion, with a 17% operating margin, driven by AI "
        "solutions like Vertex AI and BigQuery.",
        "Alphabet's Cloud revenue grew 35% year-over-year, with operating margins increasing to 17%.",
        10,
    ),
    (
        "AI-driven features like AI Overviews and Google Lens are transforming user experiences and increasing "
        "engagement.",
        "The executives discuss the benefits of GenAI, including reduced costs, greater customer engagement, "
        "and faster response times.",
        5,
    ),
    (
        "Alphabet plans to advance its AI portfolio with the next-generation Gemini model and broader "
        "enterprise integrations.",
        "The executives discuss various AI-powered products and services, including Gemini, Google Cloud AI, "
        "and Google DeepMind.",
        1,
    ),
)


def task_section(marker: str, text: str):
    """Mock-rule predicate matching only the task part of a rendered prompt.

    The in-context examples repeat fixture strings, so a plain substring rule
    would fire for every request.
    """

    def pred(conversation: str) -> bool:
        _, sep, tail = conversation.partition(marker)
        return bool(sep) and text in tail

    return pred
