class UnionFind:
    """Disjoint sets over ``0 .. n-1`` whose representatives are class minima.

    Linking always hangs the larger root under the smaller one, so ``find``
    returns the least element of a class. Path compression is kept; rank is
    not, since it would break the minimum-representative rule.
    """

    __slots__ = ("parent",)

    def __init__(self, n: int = 1):
        if n < 1:
            raise ValueError("UnionFind needs at least one element")
        self.parent = list(range(n))

    def __len__(self):
        return len(self.parent)

    def extend(self, count: int) -> None:
        start = len(self.parent)
        self.parent.extend(range(start, start + count))

    def add(self) -> int:
        x = len(self.parent)
        self.parent.append(x)
        return x

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        x = self.find(x)
        y = self.find(y)
        if x == y:
            return False
        if x < y:
            self.parent[y] = x
        else:
            self.parent[x] = y
        return True

    def same(self, x: int, y: int) -> bool:
        return self.find(x) == self.find(y)

    def classes(self, elements=None) -> list:
        """Classes as sorted lists, ordered by their minimum."""
        groups: dict = {}
        for x in range(len(self.parent)) if elements is None else elements:
            groups.setdefault(self.find(x), []).append(x)
        return [sorted(g) for _, g in sorted(groups.items())]


def make(n: int) -> UnionFind:
    return UnionFind(n)
