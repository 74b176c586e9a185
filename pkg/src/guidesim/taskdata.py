"""Static task data: name lists, product keyword dictionaries, shirt palettes."""

# Doorbell nameplates.
NAMES = (
    "MUELLER", "MEIER", "SCHMID", "KELLER", "WEBER", "HUBER", "FISCHER",
    "BAUMANN", "FREI", "GERBER", "BRUNNER", "STEINER", "WIDMER", "MOSER",
    "GRAF", "ROTH", "KUNZ", "WYSS", "SUTER", "HOFER", "BERGER", "ARNOLD",
    "SCHNEIDER", "ZIMMERMANN",
)

# Grocery shelf: 20 tea boxes, each with identifying keywords.
TEA_PRODUCTS = (
    "CHAMOMILE", "PEPPERMINT", "ROOIBOS", "EARLGREY", "JASMINE",
    "HIBISCUS", "GINGER", "LEMONGRASS", "DARJEELING", "SENCHA",
    "MATCHA", "FENNEL", "LAVENDER", "VERBENA", "LIQUORICE",
    "ELDERFLOWER", "NETTLE", "ROSEHIP", "ASSAM", "BERGAMOT",
)

KEYWORDS = {
    "CHAMOMILE": {"CHAMOMILE", "SOOTHING", "FLOWERS"},
    "PEPPERMINT": {"PEPPERMINT", "FRESH", "COOLING"},
    "ROOIBOS": {"ROOIBOS", "REDBUSH", "CAFFEINE"},
    "EARLGREY": {"EARLGREY", "BLACK", "CITRUS"},
    "JASMINE": {"JASMINE", "GREEN", "BLOSSOM"},
    "HIBISCUS": {"HIBISCUS", "TANGY", "CRIMSON"},
    "GINGER": {"GINGER", "SPICY", "WARMING"},
    "LEMONGRASS": {"LEMONGRASS", "ZESTY", "BRIGHT"},
    "DARJEELING": {"DARJEELING", "ESTATE", "MUSCATEL"},
    "SENCHA": {"SENCHA", "STEAMED", "GRASSY"},
    "MATCHA": {"MATCHA", "POWDER", "CEREMONIAL"},
    "FENNEL": {"FENNEL", "ANISE", "DIGESTIVE"},
    "LAVENDER": {"LAVENDER", "CALMING", "PROVENCE"},
    "VERBENA": {"VERBENA", "LEMONY", "EVENING"},
    "LIQUORICE": {"LIQUORICE", "SWEET", "ROOTS"},
    "ELDERFLOWER": {"ELDERFLOWER", "DELICATE", "SUMMER"},
    "NETTLE": {"NETTLE", "HERBAL", "WILD"},
    "ROSEHIP": {"ROSEHIP", "FRUITY", "VITAMIN"},
    "ASSAM": {"ASSAM", "MALTY", "STRONG"},
    "BERGAMOT": {"BERGAMOT", "AROMATIC", "ORANGE"},
}

# Shirt palette: RGB per (base colour, brightness level), level 1 darkest.
PALETTE = {
    "red": {1: (100, 15, 15), 2: (185, 35, 35), 3: (240, 120, 120)},
    "blue": {1: (15, 25, 100), 2: (40, 60, 190), 3: (120, 150, 240)},
    "green": {1: (15, 90, 20), 2: (40, 170, 50), 3: (130, 230, 140)},
    "yellow": {1: (120, 110, 10), 2: (200, 185, 25), 3: (250, 240, 120)},
    "purple": {1: (70, 15, 95), 2: (130, 40, 170), 3: (190, 130, 230)},
    "orange": {1: (140, 60, 10), 2: (220, 110, 25), 3: (250, 180, 110)},
    "teal": {1: (10, 95, 95), 2: (30, 170, 170), 3: (130, 230, 230)},
}

COLOUR_COMBOS = (
    ("red", "blue"),
    ("green", "purple"),
    ("orange", "teal"),
    ("red", "teal"),
    ("blue", "yellow"),
)

FINDER_LABELS = ("ball", "bottle", "cup", "shoe", "banana", "book", "glove", "brush")
