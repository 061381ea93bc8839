total = 0
for i in range(10):
    while total < 5:
        total += i
