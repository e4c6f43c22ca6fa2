"""Synthetic corpus builders shared across the test suite."""

import random

from convseg import corpus

CONTENT_WORDS = [
    "stir", "mixture", "gently", "combine", "sauce", "tomato", "garlic",
    "onion", "slowly", "pan", "butter", "flour", "sugar", "salt", "pepper",
    "bowl", "whisk", "batter", "oven", "tray", "golden", "crispy", "tender",
    "chicken", "beef", "rice", "pasta", "water", "broth", "herbs", "lemon",
    "juice", "olive", "drizzle", "sprinkle", "chopped", "sliced", "diced",
    "grated", "cheese", "cream", "milk", "eggs", "vanilla", "cinnamon",
]

TIME_CUE_TEMPLATES = [
    "Simmer everything for {n} minutes.",
    "Bake in the oven for {n} minutes.",
    "Let it rest for {n} hours.",
    "Cook gently for {n} minutes.",
]

TEMP_CUE_TEMPLATES = [
    "Preheat oven to {n} degrees.",
    "Heat the pan to {n} degrees.",
]

PLAIN_TEMPLATES = [
    "Stir the {a} into the {b}.",
    "Combine the {a} with the {b}.",
    "Add the {a} and the {b} together.",
    "Whisk the {a} until smooth.",
    "Spread the {a} over the {b}.",
    "Fold the {a} into the {b} carefully.",
]


def plain_sentence(rng):
    template = rng.choice(PLAIN_TEMPLATES)
    a, b = rng.sample(CONTENT_WORDS, 2)
    return template.format(a=a, b=b)


def cue_sentence(rng):
    if rng.random() < 0.5:
        template = rng.choice(TIME_CUE_TEMPLATES)
    else:
        template = rng.choice(TEMP_CUE_TEMPLATES)
    return template.format(n=rng.choice([5, 10, 15, 20, 25, 180, 190, 200, 350]))


def make_recipe(rng, rid, n_steps=None, max_sentences_per_step=2, annotated=False):
    """Recipe whose steps are 1..max_sentences_per_step plain sentences."""
    n_steps = n_steps if n_steps is not None else rng.randint(3, 6)
    steps = []
    for _ in range(n_steps):
        n_sent = rng.randint(1, max_sentences_per_step)
        steps.append(" ".join(plain_sentence(rng) for _ in range(n_sent)))
    return corpus.RawRecipe(id=rid, title=f"Recipe {rid}", steps=steps, annotated=annotated)


def make_corpus(seed, n_docs, prefix="doc", **kwargs):
    rng = random.Random(seed)
    return [make_recipe(rng, f"{prefix}-{i:04d}", **kwargs) for i in range(n_docs)]


def make_documents(seed, n_docs, prefix="doc", **kwargs):
    return [
        corpus.build_document(r)
        for r in make_corpus(seed, n_docs, prefix=prefix, **kwargs)
    ]


def make_cue_recipe(rng, rid, n_steps=None, noisy=False):
    """Recipe whose step ends are exactly the cue sentences.

    Every step is 0..2 plain sentences followed by one time/temperature cue
    sentence, so a break label is a deterministic function of the cue
    features. With noisy=True one boundary decision is corrupted: the last
    sentence of one step is plain instead of a cue (the cue rule then
    misses that break).
    """
    n_steps = n_steps if n_steps is not None else rng.randint(3, 6)
    steps = [
        " ".join([plain_sentence(rng) for _ in range(rng.randint(0, 2))] + [cue_sentence(rng)])
        for _ in range(n_steps)
    ]
    if noisy:
        victim = rng.randrange(n_steps - 1)  # keep the final step intact
        steps[victim] = " ".join(
            [plain_sentence(rng) for _ in range(rng.randint(0, 2))] + [plain_sentence(rng)]
        )
    return corpus.RawRecipe(id=rid, title=f"Cue recipe {rid}", steps=steps)


def make_cue_documents(seed, n_docs, noise_doc_fraction=0.1):
    """Cue-labelled corpus; a noise_doc_fraction of documents carry one
    corrupted boundary label."""
    rng = random.Random(seed)
    docs = []
    n_noisy = int(round(noise_doc_fraction * n_docs))
    for i in range(n_docs):
        recipe = make_cue_recipe(rng, f"cue-{i:04d}", noisy=i < n_noisy)
        docs.append(corpus.build_document(recipe))
    rng.shuffle(docs)
    return docs


def make_two_topic_recipe(rng, rid, n_sentences_per_topic=10, words_per_sentence=10):
    """Two disjoint-vocabulary halves; the gold break sits at the switch.

    Each sentence holds exactly words_per_sentence content words so that
    TextTiling pseudosentences (w = words_per_sentence) align with
    sentences.
    """
    vocab_a = ["alder", "basalt", "cedar", "dune", "ember", "fjord",
               "granite", "heather", "iris", "juniper", "kelp", "lichen"]
    vocab_b = ["magnet", "nickel", "oxide", "piston", "quartz", "rotor",
               "solder", "torque", "uranium", "valve", "widget", "xenon"]

    def topic_sentences(vocab):
        sentences = []
        for _ in range(n_sentences_per_topic):
            words = [rng.choice(vocab) for _ in range(words_per_sentence)]
            words[0] = words[0].capitalize()
            sentences.append(" ".join(words) + ".")
        return sentences

    step_a = " ".join(topic_sentences(vocab_a))
    step_b = " ".join(topic_sentences(vocab_b))
    return corpus.RawRecipe(id=rid, title=f"Two-topic {rid}", steps=[step_a, step_b])
