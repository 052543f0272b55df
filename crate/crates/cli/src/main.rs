fn main() {
    println!("djopt placeholder");
}
