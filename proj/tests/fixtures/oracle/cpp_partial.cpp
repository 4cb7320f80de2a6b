#include <iostream>
int main() {
    long long a, b;
    std::cin >> a >> b;
    if (b < 0) b = -b;
    std::cout << a + b << "\n";
}
