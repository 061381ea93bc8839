count: int = "three"


def half(n: int) -> float:
    return "x"


half(1, 2)
