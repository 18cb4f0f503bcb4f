"""Bundled demonstration data.

The original corpus (curated violent-event entries plus their source
sections) cannot be redistributed here, so this module synthesizes a
shape-faithful stand-in with the same structure and exact counts: 13 works
of 2564 sections total, 461 of them violent, and a catalog of 2780 curated
events labeled along all four dimensions. Generation is seeded with fixed
constants, so every build produces byte-identical data.

Two real anchor entries are included: the killing of Cleitus (Alexander
51.5) and the aftermath of the battle against Tissaphernes (Agesilaus 10.3).
"""

from __future__ import annotations

from pathlib import Path
from random import Random

from .jsonl import write_jsonl
from .records import CuratedEvent, Passage, SourceRef
from .ingest import passage_id_for

BUNDLE_SEED = 461_2103  # fixed; the bundle never varies with user seeds

SECTIONS_PER_CHAPTER = 6

# (work_id, total sections, violent sections) -- totals 2564 and 461
WORKS = [
    ("Agesilaus", 200, 38),
    ("Alcibiades", 190, 34),
    ("Alexander", 310, 62),
    ("Antony", 290, 55),
    ("Caesar", 280, 58),
    ("Cimon", 95, 14),
    ("Crassus", 170, 33),
    ("Demetrius", 215, 38),
    ("Lysander", 150, 25),
    ("Nicias", 145, 26),
    ("Pelopidas", 160, 29),
    ("Pericles", 180, 22),
    ("Sulla", 179, 27),
]

CLEITUS_REF = SourceRef("Alexander", 51, 5)
CLEITUS_TEXT = (
    "And so, at last, Alexander seized a spear from one of his guards, met Cleitus "
    "as he was drawing aside the curtain before the door, and ran him through."
)
TISSAPHERNES_REF = SourceRef("Agesilaus", 10, 3)
TISSAPHERNES_TEXT = (
    "As a result of this battle, the Greeks could not only harry the country of the King "
    "without fear, but had the satisfaction of seeing due punishment inflicted upon "
    "Tisaphernes, an abominable man, and most hateful to the Greek race."
)

NAMES = """Cleitus Philotas Parmenio Callisthenes Hephaestion Craterus Antigonus Ptolemy
Seleucus Lysimachus Cassander Perdiccas Eumenes Agis Cleomenes Brasidas Demosthenes
Cleon Themistocles Aristides Phocion Epaminondas Brutus Cassius Cicero Marius Lucullus
Sertorius Cato Metellus Scipio Fabius Timoleon Dion Aratus Philopoemen Pyrrhus""".split()

PLACES = """Athens Sparta Thebes Corinth Argos Syracuse Sardis Susa Babylon Ecbatana
Pella Amphipolis Byzantium Rhodes Ephesus Miletus Halicarnassus Tyre Gaza Memphis Rome
Capua Tarentum Pharsalus Philippi Chaeronea Plataea Mantinea Leuctra Cunaxa Issus""".split()

REGIONS = """Thrace Macedonia Thessaly Boeotia Attica Laconia Ionia Caria Cilicia
Phrygia Cappadocia Bactria Sogdiana Media Persis Egypt Syria Pontus Armenia""".split()

PEOPLES = """Persians Spartans Athenians Thebans Macedonians Romans Parthians Gauls
Scythians Illyrians Thracians Carthaginians Samnites""".split()

GODS = "Apollo Athena Zeus Artemis Dionysus Poseidon Demeter".split()

# -- phrase pools for the composed event sentences -------------------------

CONTEXT_PHRASES = {
    "war/military campaign": [
        "during the campaign against the {people}",
        "in the course of the war with the {people}",
        "while the army lay in the field against the {people}",
    ],
    "battle": [
        "when the battle lines met at {place}",
        "in the battle fought near {place}",
    ],
    "military": [
        "among the soldiers quartered at {place}",
        "at the military muster near {place}",
    ],
    "siege": ["during the siege of {place}", "while {place} lay under siege"],
    "jurisdictional": ["before the court at {place}", "at the trial held in {place}"],
    "civilian": ["in the marketplace of {place}", "at a private house in {place}"],
    "plunder": [
        "while raiding parties stripped the countryside of {region}",
        "in the plundering of {place}",
    ],
    "ambush": [
        "from an ambush laid along the road to {place}",
        "when the ambush was sprung near {place}",
    ],
    "conspiracy": [
        "as the conspirators gathered in {place}",
        "when the plot against the magistrates of {place} ripened",
    ],
    "revolt": ["when {place} rose in revolt", "amid the uprising at {place}"],
    "conquest": ["in the conquest of {region}", "as {region} was being subdued"],
    "naval battle": [
        "when the fleets engaged off {place}",
        "in the sea-fight near {place}",
    ],
    "religious": [
        "at the sanctuary of {god}",
        "during the rites held for {god}",
    ],
    "institutional": [
        "by decree of the council of {place}",
        "under the orders of the magistrates of {place}",
    ],
    "sack": ["in the sack of {place}", "when {place} was given over to the soldiers"],
    "single combat": [
        "in single combat before the two armies",
        "when the champions met between the lines",
    ],
    "regicide": [
        "within the palace of the king of {region}",
        "at the king's own hearth in {place}",
    ],
    "entertaining": [
        "at a banquet in {place}",
        "during the games held at {place}",
        "amid the drinking at {place}",
    ],
    "mutiny": [
        "when the garrison of {place} turned on its officers",
        "amid the mutiny of the troops at {place}",
    ],
    "familicide": [
        "within his own household in {place}",
        "under the family roof at {place}",
    ],
    "fratricide": ["in a quarrel between the brothers at {place}"],
    "paramilitary": [
        "among the armed bands roaming {region}",
        "when the hired bands entered {place}",
    ],
    "unknown": [
        "at a time and place the record does not give",
        "in circumstances left unstated",
    ],
    "assassination": ["as the magistrate left the assembly at {place}"],
    "piracy": ["when pirates fell upon the coast of {region}"],
}

LEVEL_PHRASES = {
    "interpersonal": [
        "{name} struck {name2} down",
        "{name} ran {name2} through with a spear",
        "{name} seized a spear from one of the guards and ran {name2} through",
        "{name} stabbed {name2} with a dagger",
        "{name} cut {name2} down where he stood",
        "{name} met {name2} at the door and ran him through",
        "{name} strangled {name2} with his own hands",
        "{name} beat {name2} to death with a staff",
        "{name} struck {name2} with a sword and killed him",
    ],
    "intrapersonal": [
        "{name} fell upon his own sword",
        "{name} took his own life with poison",
        "{name} cast himself from the walls",
        "{name} opened his own veins",
    ],
    "intersocial": [
        "the {people} slaughtered great numbers of the {people2}",
        "the {people} cut down the ranks of the {people2}",
        "the {people} put the men of the {people2} to the sword",
        "the {people} overwhelmed and massacred the {people2}",
    ],
    "intrasocial": [
        "the citizens of {place} turned their weapons upon one another",
        "one faction butchered the other within the walls of {place}",
        "kinsmen of the same city shed each other's blood",
        "the popular party fell upon the oligarchs of their own city",
    ],
}

MOTIVE_PHRASES = {
    "tactical/strategical": [
        "to secure the high ground",
        "to break the enemy's supply lines",
        "as the stratagem demanded",
    ],
    "political": [
        "to master the state",
        "for the sake of power in the city",
        "to overthrow the ruling party",
    ],
    "following orders": [
        "at the express command of their general",
        "in obedience to orders from home",
        "as the king had commanded",
    ],
    "emotional": [
        "inflamed with wine and anger",
        "out of grief and rage",
        "stung by jealousy",
    ],
    "economical": [
        "for the sake of plunder and pay",
        "to seize the treasure",
        "out of greed for the revenues",
    ],
    "ambition": [
        "in pursuit of glory",
        "to outshine his rivals",
    ],
    "self-defence": [
        "to save his own life",
        "warding off the attack upon them",
    ],
    "social": [
        "to wipe away the dishonor",
        "as honor among his peers required",
    ],
    "religious": [
        "at the bidding of the oracle",
        "to appease the god",
    ],
    "none/accident": [
        "though no harm had been intended",
        "by mischance rather than design",
    ],
    "other": ["for reasons the historians dispute"],
    "unknown": ["for reasons the record does not give"],
    "revenge": ["to requite an old wrong"],
}

CONSEQUENCE_PHRASES = {
    "death": [
        "the dead were mourned throughout the city",
        "he did not live to see the morning",
    ],
    "destruction/devastation": [
        "the country was laid waste for miles around",
        "the city was reduced to ashes",
    ],
    "victory": [
        "a decisive victory followed",
        "the victors raised a trophy on the field",
    ],
    "capture": [
        "the survivors were taken captive",
        "the stronghold passed into the victors' hands",
    ],
    "campaign": ["a new campaign was set in motion the next spring"],
    "conquest": ["the whole region was brought under subjection"],
    "siege": ["a siege was laid about the city soon after"],
    "battle": ["a pitched battle followed within days"],
    "retreat": ["the army withdrew by night"],
    "surrender": ["the garrison laid down its arms"],
    "exile": ["the survivors were driven into exile"],
    "coronation/inauguration": ["a new ruler was installed upon the throne"],
    "tyranny": ["a tyranny was established over the city"],
    "civil conflict/civil war": ["the city slid into open civil war"],
    "declaration of war": ["war was declared before the season's end"],
    "declaration of peace/truce": ["a truce was sworn between the armies"],
    "treaty/agreement/pact": ["a treaty was drawn up and sworn"],
    "sending of envoys": ["envoys were dispatched to treat for terms"],
    "issuing of law/decrees": ["new decrees were posted in the agora"],
    "bestowing of honors": ["crowns and honors were voted in the assembly"],
    "financial reward": ["a bounty of silver was paid out"],
    "release of prisoners": ["the prisoners were released without ransom"],
    "garrisoning of troops": ["a garrison was installed in the citadel"],
    "repopulation": ["settlers were brought in to fill the empty streets"],
    "deportation": ["the inhabitants were carried off to another land"],
    "plunder": ["wagonloads of spoil were carried away"],
    "famine": ["famine pressed the survivors through the winter"],
    "injury": ["many were left maimed and crippled"],
    "mutilation": ["the bodies were shamefully mutilated"],
    "execution": ["the ringleaders were led out to execution"],
    "torture": ["the captives were put to torture"],
    "revenge": ["vengeance was exacted in the following year"],
    "mutiny": ["the troops soon rose against their own officers"],
    "seclusion": ["he shut himself away from the eyes of men"],
    "applause": ["the crowd thundered its applause"],
    "other": ["what followed is variously reported"],
    "unknown": ["what came of it the record does not say"],
    "enslavement": ["the captives were sold into slavery"],
}

# catalog label counts: five times the held-out supports, with one or two
# instances moved into the classes the test split never realizes
LEVEL_COUNTS = {
    "interpersonal": 480,
    "intrapersonal": 85,
    "intersocial": 1855,
    "intrasocial": 360,
}
CONTEXT_COUNTS = {
    "civilian": 145, "jurisdictional": 150, "war/military campaign": 903,
    "battle": 345, "plunder": 85, "ambush": 75, "conspiracy": 55, "revolt": 105,
    "conquest": 35, "naval battle": 10, "religious": 30, "institutional": 20,
    "sack": 5, "single combat": 20, "siege": 155, "unknown": 25, "regicide": 55,
    "military": 465, "entertaining": 35, "mutiny": 40, "familicide": 10,
    "fratricide": 5, "paramilitary": 5, "assassination": 1, "piracy": 1,
}
MOTIVE_COUNTS = {
    "unknown": 100, "political": 610, "tactical/strategical": 984,
    "economical": 140, "following orders": 385, "self-defence": 65,
    "emotional": 215, "ambition": 175, "social": 25, "religious": 30,
    "other": 30, "none/accident": 20, "revenge": 1,
}
CONSEQUENCE_COUNTS = {
    "unknown": 994, "campaign": 140, "conquest": 120,
    "coronation/inauguration": 60, "exile": 30, "death": 270, "other": 160,
    "victory": 80, "bestowing of honors": 30, "issuing of law/decrees": 15,
    "injury": 25, "battle": 75, "declaration of war": 10, "retreat": 50,
    "mutiny": 10, "sending of envoys": 65, "civil conflict/civil war": 5,
    "tyranny": 10, "capture": 70, "destruction/devastation": 130,
    "repopulation": 10, "declaration of peace/truce": 45,
    "release of prisoners": 10, "garrisoning of troops": 30, "famine": 5,
    "siege": 150, "deportation": 20, "treaty/agreement/pact": 15,
    "surrender": 10, "financial reward": 15, "seclusion": 10, "plunder": 30,
    "mutilation": 5, "revenge": 30, "execution": 20, "torture": 15,
    "applause": 10, "enslavement": 1,
}
CATALOG_SIZE = 2780


def _fill(template: str, rng: Random, fixed: dict | None = None) -> tuple[str, dict]:
    slots = dict(fixed or {})
    slots.setdefault("name", rng.choice(NAMES))
    name2 = rng.choice(NAMES)
    while name2 == slots["name"]:
        name2 = rng.choice(NAMES)
    slots.setdefault("name2", name2)
    slots.setdefault("place", rng.choice(PLACES))
    slots.setdefault("region", rng.choice(REGIONS))
    slots.setdefault("people", rng.choice(PEOPLES))
    people2 = rng.choice(PEOPLES)
    while people2 == slots["people"]:
        people2 = rng.choice(PEOPLES)
    slots.setdefault("people2", people2)
    slots.setdefault("god", rng.choice(GODS))
    return template.format(**slots), slots


def compose_event_sentence(
    level: str, context: str, motive: str, consequence: str, rng: Random
) -> tuple[str, str]:
    """Build one violent-event sentence carrying all four label signals.

    Returns (sentence, short title).
    """
    ctx, slots = _fill(rng.choice(CONTEXT_PHRASES[context]), rng)
    act, slots = _fill(rng.choice(LEVEL_PHRASES[level]), rng, slots)
    mot = rng.choice(MOTIVE_PHRASES[motive])
    cons = rng.choice(CONSEQUENCE_PHRASES[consequence])
    order = rng.random()
    if order < 0.5:
        sentence = f"{ctx}, {act}, {mot}, and {cons}."
    else:
        sentence = f"{ctx}, {mot}, {act}, and {cons}."
    sentence = sentence[0].upper() + sentence[1:]
    if level == "interpersonal":
        title = f"{slots['name']} kills {slots['name2']}"
    elif level == "intrapersonal":
        title = f"{slots['name']} dies by his own hand"
    elif level == "intersocial":
        title = f"Slaughter of the {slots['people2']}"
    else:
        title = f"Civil bloodshed at {slots['place']}"
    return sentence, title


_NONVIOLENT_THEMES = [
    [
        "The assembly of {place} met to consider the embassy from the {people}.",
        "{name} spoke at length concerning the treaty, and the people voted as he advised.",
    ],
    [
        "{name} sailed for {place} at the opening of spring with a convoy of grain ships.",
        "Contrary winds held him some days at {place2}, where he was hospitably received.",
    ],
    [
        "About this time {name} married the daughter of {name2}, a match long prepared by their families.",
        "The wedding was celebrated with modest expense, as the custom of the city required.",
    ],
    [
        "{name} sacrificed to {god} and, the omens being favorable, dedicated a tithe of the harvest.",
        "The priests read the signs and pronounced the season propitious for sowing.",
    ],
    [
        "The revenues of {place} were farmed out anew, and {name} reformed the keeping of the public accounts.",
        "A portion of the silver was set aside for the rebuilding of the docks.",
    ],
    [
        "Letters came from {name} urging a settlement of the dispute over the border markets.",
        "Envoys went back and forth all that winter, and the matter was referred to arbitration.",
    ],
    [
        "As a young man {name} studied under the sophists at {place} and was reckoned quick at argument.",
        "He practiced speaking daily and committed the older poets to memory.",
    ],
    [
        "{name} won the chariot race at the games held at {place}, and the heralds proclaimed his crown.",
        "The city feasted him on his return and voted him a statue in bronze.",
    ],
    [
        "The walls of {place} were repaired and the towers raised a course higher under {name}'s direction.",
        "Timber was floated down the river and masons hired from {place2}.",
    ],
]

# military activity without violent acts: the hard negatives
_HARD_NEGATIVE_THEMES = [
    [
        "{name} mustered the levies at {place} and reviewed the ranks at first light.",
        "The army then encamped across the river and fortified the camp with a palisade.",
    ],
    [
        "The fleet was fitted out at {place} through the winter, and rowers were enrolled from the islands.",
        "By spring a hundred ships lay ready at their moorings.",
    ],
    [
        "{name} drew up the battle line and the enemy drew up theirs, but heralds passed between and a truce was agreed.",
        "Both armies withdrew to their camps without engaging.",
    ],
    [
        "Scouts reported the passes held in strength, so {name} turned the column toward {place} by forced marches.",
        "The baggage was sent round by sea with a small escort.",
    ],
    [
        "A colony was established on the coast of {region}, and settlers were enrolled from among the poorer citizens.",
        "The land was divided by lot and the walls traced out.",
    ],
]

_CLOSINGS = [
    "These things are related by the older writers.",
    "So much, then, for these affairs.",
    "Of this the accounts agree.",
    "This at least is what the chroniclers record.",
]


def compose_nonviolent_passage(rng: Random) -> str:
    themes = _NONVIOLENT_THEMES + (
        _HARD_NEGATIVE_THEMES if rng.random() < 0.45 else []
    )
    theme = rng.choice(themes)
    slots: dict = {}
    sentences = []
    for template in theme:
        fixed = dict(slots)
        fixed.setdefault("place2", rng.choice(PLACES))
        sentence, slots = _fill(template, rng, fixed)
        sentences.append(sentence)
    if rng.random() < 0.5:
        sentences.append(rng.choice(_CLOSINGS))
    return " ".join(sentences)


def _counts_to_labels(counts: dict[str, int], rng: Random) -> list[str]:
    labels = [label for label, n in counts.items() for _ in range(n)]
    rng.shuffle(labels)
    return labels


def _chapter_refs(work: str, total: int) -> list[SourceRef]:
    refs = []
    chapter, section = 1, 1
    for _ in range(total):
        refs.append(SourceRef(work, chapter, section))
        section += 1
        if section > SECTIONS_PER_CHAPTER:
            chapter, section = chapter + 1, 1
    return refs


def _detection_label_streams(rng: Random, n: int) -> list[tuple[str, str, str, str]]:
    """Label tuples for violent sections, with plausible narrative skew."""
    weighted = lambda pairs: [lab for lab, w in pairs for _ in range(w)]
    levels = weighted(
        [("intersocial", 55), ("interpersonal", 25), ("intrasocial", 14), ("intrapersonal", 6)]
    )
    contexts = weighted(
        [
            ("war/military campaign", 30), ("battle", 16), ("military", 14),
            ("siege", 8), ("plunder", 4), ("ambush", 4), ("conspiracy", 3),
            ("revolt", 4), ("civilian", 3), ("jurisdictional", 3), ("sack", 2),
            ("entertaining", 2), ("single combat", 2), ("regicide", 2),
            ("naval battle", 1), ("mutiny", 1), ("unknown", 1),
        ]
    )
    motives = weighted(
        [
            ("tactical/strategical", 35), ("political", 22), ("following orders", 14),
            ("emotional", 8), ("economical", 6), ("ambition", 6), ("self-defence", 3),
            ("social", 2), ("religious", 2), ("unknown", 2),
        ]
    )
    consequences = weighted(
        [
            ("unknown", 30), ("death", 14), ("victory", 8), ("destruction/devastation", 8),
            ("capture", 6), ("siege", 5), ("retreat", 4), ("plunder", 4),
            ("battle", 4), ("exile", 2), ("injury", 2), ("surrender", 2),
            ("sending of envoys", 2), ("campaign", 2), ("conquest", 2), ("execution", 1),
        ]
    )
    return [
        (rng.choice(levels), rng.choice(contexts), rng.choice(motives), rng.choice(consequences))
        for _ in range(n)
    ]


def build_detection_bundle() -> tuple[list[Passage], list[CuratedEvent]]:
    """The 13-work corpus and its 461 curated events."""
    rng = Random(BUNDLE_SEED)
    passages: list[Passage] = []
    events: list[CuratedEvent] = []
    anchors = {
        CLEITUS_REF: (
            CLEITUS_TEXT,
            "Alexander kills Cleitus with a spear",
            ("interpersonal", "entertaining", "emotional", "death"),
            {"weapon": "Spear", "year": "328 B.C.", "location": "Maracanda (Samarkand)",
             "period": "Hellenistic Greece"},
        ),
        TISSAPHERNES_REF: (
            TISSAPHERNES_TEXT,
            "Punishment inflicted upon Tisaphernes",
            ("interpersonal", "war/military campaign", "political", "death"),
            {"year": "395 B.C.", "location": "Sardis", "period": "Classical Greece"},
        ),
    }
    for work, total, n_violent in WORKS:
        refs = _chapter_refs(work, total)
        violent_refs = set(rng.sample(refs, n_violent))
        # anchors are violent by construction; swap one sampled ref out if needed
        for anchor in anchors:
            if anchor.work_id == work and anchor not in violent_refs:
                violent_refs.discard(next(iter(sorted(violent_refs))))
                violent_refs.add(anchor)
        label_stream = iter(_detection_label_streams(rng, n_violent))
        for ref in refs:
            if ref in anchors:
                text, title, labels, extras = anchors[ref]
                level, context, motive, consequence = labels
                passages.append(Passage(id=passage_id_for(ref), ref=ref, text=text))
                events.append(
                    CuratedEvent(
                        id=f"ev-{passage_id_for(ref)}",
                        title=title,
                        ref=ref,
                        translation_text=text,
                        level=level,
                        context=context,
                        motive=motive,
                        consequence=consequence,
                        extras=extras,
                    )
                )
            elif ref in violent_refs:
                level, context, motive, consequence = next(label_stream)
                sentence, title = compose_event_sentence(level, context, motive, consequence, rng)
                lead = compose_nonviolent_passage(rng) if rng.random() < 0.35 else ""
                text = f"{lead} {sentence}".strip()
                passages.append(Passage(id=passage_id_for(ref), ref=ref, text=text))
                events.append(
                    CuratedEvent(
                        id=f"ev-{passage_id_for(ref)}",
                        title=title,
                        ref=ref,
                        translation_text=sentence,
                        level=level,
                        context=context,
                        motive=motive,
                        consequence=consequence,
                        extras={"period": "Classical Antiquity"},
                    )
                )
            else:
                passages.append(
                    Passage(id=passage_id_for(ref), ref=ref, text=compose_nonviolent_passage(rng))
                )
    return passages, events


def make_catalog_events() -> list[CuratedEvent]:
    """The full curated catalog: 2780 events over all four dimensions."""
    rng = Random(BUNDLE_SEED + 1)
    levels = _counts_to_labels(LEVEL_COUNTS, rng)
    contexts = _counts_to_labels(CONTEXT_COUNTS, rng)
    motives = _counts_to_labels(MOTIVE_COUNTS, rng)
    consequences = _counts_to_labels(CONSEQUENCE_COUNTS, rng)
    assert len(levels) == len(contexts) == len(motives) == len(consequences) == CATALOG_SIZE
    sources = [
        ("Herodian History", 8), ("Thucydides Histories", 8), ("Xenophon Hellenica", 7),
        ("Tacitus Annals", 16), ("Plutarch Lives", 40), ("Polybius Histories", 12),
    ]
    events = []
    for i in range(CATALOG_SIZE):
        level, context, motive, consequence = levels[i], contexts[i], motives[i], consequences[i]
        sentence, title = compose_event_sentence(level, context, motive, consequence, rng)
        work, max_book = sources[i % len(sources)]
        ref = SourceRef(work, rng.randint(1, max_book), rng.randint(1, 60))
        events.append(
            CuratedEvent(
                id=f"cat-{i:04d}",
                title=title,
                ref=ref,
                translation_text=sentence,
                level=level,
                context=context,
                motive=motive,
                consequence=consequence,
                extras={"period": "Classical Antiquity"},
            )
        )
    return events


def write_corpus_files(passages: list[Passage], corpus_dir: str | Path) -> list[Path]:
    """Write passages as section-structured text files, one work per file."""
    corpus_dir = Path(corpus_dir)
    corpus_dir.mkdir(parents=True, exist_ok=True)
    by_work: dict[str, list[Passage]] = {}
    for p in passages:
        by_work.setdefault(p.ref.work_id, []).append(p)
    paths = []
    for work in sorted(by_work):
        lines = []
        for p in sorted(by_work[work], key=lambda p: (p.ref.chapter, p.ref.section)):
            lines.append(f"@@ {p.ref.work_id} {p.ref.chapter}.{p.ref.section}")
            lines.append(p.text)
        path = corpus_dir / f"{work.replace(' ', '_').lower()}.txt"
        path.write_text("\n".join(lines) + "\n", "utf-8")
        paths.append(path)
    return paths


def write_bundle(out_dir: str | Path) -> dict[str, Path]:
    """Materialize the full bundle: corpus files plus both event exports."""
    out_dir = Path(out_dir)
    passages, events = build_detection_bundle()
    corpus_paths = write_corpus_files(passages, out_dir / "corpus")
    events_path = out_dir / "events.jsonl"
    write_jsonl(events_path, (e.to_json() for e in events))
    catalog_path = out_dir / "catalog_events.jsonl"
    write_jsonl(catalog_path, (e.to_json() for e in make_catalog_events()))
    return {
        "corpus_dir": out_dir / "corpus",
        "corpus_files": corpus_paths,
        "events": events_path,
        "catalog": catalog_path,
    }
