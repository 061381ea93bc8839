counter = 0


def bump():
    global counter
    counter += 1
    eval("1")
