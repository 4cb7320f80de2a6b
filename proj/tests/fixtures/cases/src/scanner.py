# fixture: scanner
n = int(input())
nums = list(map(int, input().split()))
print(sum(nums) * n)
