def load(path):
    try:
        return open(path).read()
    except OSError as exc:
        raise ValueError(path) from exc
    finally:
        pass
